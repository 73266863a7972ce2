"""Mixed-radix decimation-in-time FFT and the unitary DFT on Z_N.

Sizes ``N = M**k`` are split in the base ``M`` (a few digits at a time), so no
padding is ever needed. Other sizes fall back to their smallest prime factor,
and a prime length is handled by a direct kernel product.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def _smallest_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


# digits of the base are grouped until the radix would exceed this
MAX_RADIX = 64


def _choose_radix(n: int, radix: int | None) -> int:
    base = radix if radix and 1 < radix <= n and n % radix == 0 else _smallest_factor(n)
    r = base
    while r * base <= MAX_RADIX and n % (r * base) == 0:
        r *= base
    return r


@lru_cache(maxsize=256)
def _kernel(n: int, sign: int) -> np.ndarray:
    jl = np.outer(np.arange(n), np.arange(n)) % n
    out = np.exp(sign * 2j * np.pi * jl / n)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def _twiddles(n: int, radix: int, sign: int) -> np.ndarray:
    sub = n // radix
    rs = np.outer(np.arange(radix), np.arange(sub)) % n
    out = np.exp(sign * 2j * np.pi * rs / n)
    out.setflags(write=False)
    return out


def _fft_last(x: np.ndarray, radix: int | None, sign: int) -> np.ndarray:
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    r = _choose_radix(n, radix)
    if r == n:
        return x @ _kernel(n, sign).T
    sub = n // r
    # x[..., r*q + p] -> y[..., p, q]: the r decimated subsequences
    y = np.swapaxes(x.reshape(x.shape[:-1] + (sub, r)), -1, -2)
    y = _fft_last(np.ascontiguousarray(y), radix, sign)
    y = y * _twiddles(n, r, sign)
    # X[..., p*sub + s] = sum_r w_r^{rp} y[..., r, s]
    out = _kernel(r, sign) @ y
    return out.reshape(x.shape)


def fft(x, radix: int | None = None, axis: int = -1) -> np.ndarray:
    """Unnormalized forward transform ``X[j] = sum_l exp(-2 pi i j l / N) x[l]``."""
    x = np.moveaxis(np.asarray(x, dtype=np.complex128), axis, -1)
    return np.moveaxis(_fft_last(x, radix, -1), -1, axis)


def ifft_unnormalized(x, radix: int | None = None, axis: int = -1) -> np.ndarray:
    """Unnormalized backward transform ``x[l] = sum_j exp(+2 pi i j l / N) X[j]``."""
    x = np.moveaxis(np.asarray(x, dtype=np.complex128), axis, -1)
    return np.moveaxis(_fft_last(x, radix, +1), -1, axis)


def unitary_dft(x, radix: int | None = None, axis: int = -1) -> np.ndarray:
    """Apply ``F_N`` (kernel ``exp(-2 pi i j l / N) / sqrt(N)``) along ``axis``."""
    x = np.asarray(x)
    n = x.shape[axis]
    return fft(x, radix, axis) / np.sqrt(n)


def unitary_idft(x, radix: int | None = None, axis: int = -1) -> np.ndarray:
    """Apply ``F_N^*`` along ``axis``."""
    x = np.asarray(x)
    n = x.shape[axis]
    return ifft_unnormalized(x, radix, axis) / np.sqrt(n)


def dft_matrix(n: int) -> np.ndarray:
    """Dense unitary DFT matrix ``F_N``."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return np.array(_kernel(n, -1)) / np.sqrt(n)
