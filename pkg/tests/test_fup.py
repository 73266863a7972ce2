import math

import pytest
from hypothesis import given, settings, strategies as st

from bakerweyl.cantor import Alphabet, additive_energy, build_cantor, neighborhood_radius, proper_alphabets
from bakerweyl.errors import DomainError, ScaleError
from bakerweyl.fup import (MATRIX, PAIRSUM, TkRecord, beta_E, check_lemma41, check_lemma42,
                           check_prop43_strict, check_prop44, fekete_bounds, t_k_fft,
                           t_k_quadruple, t_k_singular, trace_TT)

MID = Alphabet(3, [0, 2])


def test_t1_middle_thirds():
    for method in (t_k_fft, t_k_quadruple, t_k_singular):
        assert method(3, [0, 2], 1).t_k == pytest.approx(10 / 9, abs=1e-12)


@pytest.mark.parametrize("M, k", [(2, 4), (3, 3), (5, 2)])
def test_t_k_degenerate_alphabets(M, k):
    N = M**k
    for method in (t_k_fft, t_k_quadruple, t_k_singular):
        assert method(M, [0], k).t_k == pytest.approx(N**-2.0, rel=1e-10)
    assert t_k_fft(M, range(M), k).t_k == pytest.approx(N, rel=1e-10)
    assert t_k_singular(M, range(M), k).t_k == pytest.approx(N, rel=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_three_methods_agree(k):
    ref = t_k_fft(3, [0, 2], k).t_k
    assert t_k_quadruple(3, [0, 2], k).t_k == pytest.approx(ref, rel=1e-8)
    assert t_k_singular(3, [0, 2], k).t_k == pytest.approx(ref, rel=1e-8)


def test_oracle_limits():
    with pytest.raises(ScaleError):
        t_k_quadruple(3, [0, 2], 7)
    with pytest.raises(ScaleError):
        t_k_singular(3, [0, 2], 7)
    with pytest.raises(DomainError):
        trace_TT(3, [0, 2], 2, 0.8, method="bogus")


def test_record_fields():
    r = t_k_fft(4, [1, 2], 3)
    assert isinstance(r, TkRecord)
    assert (r.M, r.A, r.k, r.N, r.method) == (4, (1, 2), 3, 64, "fft-pairsum")


@pytest.mark.parametrize("M, letters", [(3, [0, 2]), (4, [0, 3]), (5, [1, 2, 4])])
@pytest.mark.parametrize("rho", [0.6, 0.8, 0.95])
def test_trace_identity(M, letters, rho):
    k = 3
    a = trace_TT(M, letters, k, rho, PAIRSUM).value
    b = trace_TT(M, letters, k, rho, MATRIX).value
    assert a == pytest.approx(b, rel=1e-8)


def test_trace_full_alphabet_is_N():
    assert trace_TT(3, [0, 1, 2], 3, 0.7).value == pytest.approx(27, rel=1e-12)


@pytest.mark.parametrize("k", range(2, 7))
@pytest.mark.parametrize("rho", [0.6, 0.8, 0.95])
def test_lemma41_middle_thirds(k, rho):
    rep = check_lemma41(3, [0, 2], k, rho)
    assert rep.holds
    assert rep.params["radius"] == neighborhood_radius(3**k, rho)


def test_lemma41_with_translate_count():
    # bound with the number of translates |r| <= R actually used, 2R + 1
    worst = 0.0
    for M in (2, 3, 4, 5, 6):
        for alpha in [Alphabet(M, [0]), Alphabet.full(M)] + proper_alphabets(M):
            k = 1
            while M**k <= 729:
                for rho in (0.6, 0.8, 0.95):
                    N = M**k
                    R = neighborhood_radius(N, rho)
                    lhs = trace_TT(M, alpha, k, rho).value
                    rhs = (2 * R + 1) ** 4 * t_k_fft(M, alpha, k).t_k
                    worst = max(worst, lhs / rhs)
                k += 1
    assert worst <= 1 + 1e-9


@pytest.mark.parametrize("M", [3, 4, 5])
def test_lemma42_all_splits(M):
    for alpha in proper_alphabets(M):
        for k in range(2, 7):
            for k1 in range(1, k):
                assert check_lemma42(M, alpha, k1, k - k1).holds


def test_lemma42_equality_cases():
    full = check_lemma42(3, [0, 1, 2], 2, 3)
    assert full.lhs == pytest.approx(full.rhs, rel=1e-10)
    single = check_lemma42(3, [1], 2, 3)
    assert single.lhs == pytest.approx(single.rhs, rel=1e-10)


def test_prop43():
    one = check_prop43_strict(3, [0, 2], 1)
    assert one.holds and one.lhs == pytest.approx(10 / 9)
    assert one.rhs == pytest.approx(16 / 9)
    for M in (3, 4, 5):
        for alpha in proper_alphabets(M):
            for k in range(2, 6):
                rep = check_prop43_strict(M, alpha, k)
                assert rep.holds and rep.params["strict"]
                assert rep.rhs == pytest.approx((M**k) ** (4 * (alpha.delta - 0.5)), rel=1e-12)
    for letters in ([0, 1, 2], [1]):
        with pytest.raises(DomainError):
            check_prop43_strict(3, letters, 2)


def test_prop44_examples():
    rep = check_prop44(3, [0, 2], 1)
    assert rep.params["energy"] == 6
    assert rep.rhs == pytest.approx(3**-1.5 * 2**1.5 * math.sqrt(6))
    assert rep.holds
    full = check_prop44(3, [0, 1, 2], 3)
    assert full.lhs == pytest.approx(27) and full.rhs == pytest.approx(27**1.5)
    single = check_prop44(3, [1], 3)
    assert single.holds and single.rhs == pytest.approx(27**-1.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6).flatmap(lambda M: st.tuples(
    st.just(M), st.sets(st.integers(0, M - 1), min_size=2, max_size=M - 1), st.integers(1, 4))))
def test_prop44_identity(args):
    M, letters, k = args
    rep = check_prop44(M, letters, k)
    assert rep.holds
    assert rep.params["identity_rel_err"] <= 1e-8
    assert rep.params["energy"] == additive_energy(build_cantor(Alphabet(M, letters), k))


def test_fekete_bounds():
    recs = [t_k_fft(3, [0, 2], k) for k in range(1, 11)]
    fb = fekete_bounds(recs)
    assert fb.bounds[1] == pytest.approx(-math.log(10 / 9) / (4 * math.log(3)))
    assert fb.bounds[1] == pytest.approx(-0.02398, abs=1e-5)
    assert fb.running_best == max(fb.bounds.values())
    assert fb.running_best > 0.5 - MID.delta
    assert fb.bounds[2] > 0.5 - MID.delta
    with pytest.raises(DomainError):
        fekete_bounds([])
    with pytest.raises(DomainError):
        fekete_bounds(recs[:1] + [t_k_fft(4, [0, 2], 1)])


def test_beta_E():
    assert beta_E(0.3, 0.0) == pytest.approx(0.75 * 0.2)
    assert beta_E(0.5, 0.4) == pytest.approx(0.05)
    assert beta_E(0.6309, 0.1) == pytest.approx(-0.0857, abs=1e-4)
    with pytest.raises(DomainError):
        beta_E(1.0, 0.1)
    with pytest.raises(DomainError):
        beta_E(0.5, -0.1)


def test_report_json_key_order():
    line = check_lemma42(3, [0, 2], 1, 2).to_json()
    assert line.startswith('{"check": "lemma42", "M": 3, "A": [0, 2], "k": 3, "params"')
