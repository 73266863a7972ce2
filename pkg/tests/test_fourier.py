import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bakerweyl.fourier import dft_matrix, fft, ifft_unnormalized, unitary_dft, unitary_idft


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 9, 12, 16, 25, 30, 49, 81, 243, 1024])
def test_fft_matches_numpy(n):
    rng = np.random.default_rng(n)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    assert np.allclose(fft(x), np.fft.fft(x), atol=1e-11 * max(n, 1))
    assert np.allclose(ifft_unnormalized(x), n * np.fft.ifft(x), atol=1e-11 * max(n, 1))


@pytest.mark.parametrize("n, radix", [(27, 3), (64, 4), (125, 5), (81, 9)])
def test_explicit_radix(n, radix):
    x = np.arange(n, dtype=complex) ** 0.5
    assert np.allclose(fft(x, radix=radix), np.fft.fft(x), atol=1e-10)


def test_small_matrices():
    assert np.array_equal(dft_matrix(1), np.ones((1, 1)))
    assert np.allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)


def test_batched_axes():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((9, 4, 3)) + 0j
    for axis in range(3):
        assert np.allclose(unitary_dft(X, axis=axis), np.fft.fft(X, axis=axis, norm="ortho"))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 8, 9, 27, 32]), st.integers(0, 2**32 - 1))
def test_round_trip_and_parseval(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = unitary_dft(x)
    assert np.allclose(unitary_idft(y), x, atol=1e-12)
    assert np.linalg.norm(y) == pytest.approx(np.linalg.norm(x), rel=1e-12)
