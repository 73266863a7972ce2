"""Fourth-moment quantities of compressed DFTs and the inequalities they satisfy.

``t_k`` is the sum of fourth powers of the singular values of
``1_{C_k} F_N 1_{C_k}``. It is computed three independent ways:

* ``fft-pairsum``: one FFT of the indicator, then a sum over index pairs;
* ``quadruple-oracle``: the four-fold exponential sum, term by term;
* ``singular-value-oracle``: a dense SVD of the compression.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .cantor import (Alphabet, IndexSet, additive_energy, build_cantor, difference_histogram,
                     neighborhood, neighborhood_radius)
from .errors import BakerWeylError, DomainError, ScaleError
from .fourier import dft_matrix, unitary_dft
from .spectral import compression_matrix

FFT_PAIRSUM = "fft-pairsum"
QUADRUPLE = "quadruple-oracle"
SINGULAR = "singular-value-oracle"
PAIRSUM = "pairsum"
MATRIX = "matrix-oracle"

QUADRUPLE_BUDGET = 10**8
SVD_MAX_N = 1024
TRACE_MATRIX_MAX_N = 729
REL_SLACK = 1e-9
STRICT_MARGIN = 1e-12


@dataclass(frozen=True)
class TkRecord:
    M: int
    A: tuple[int, ...]
    k: int
    N: int
    t_k: float
    method: str


@dataclass(frozen=True)
class TraceRecord:
    M: int
    A: tuple[int, ...]
    k: int
    rho: float
    N: int
    value: float
    method: str


@dataclass
class CheckReport:
    check: str
    M: int
    A: list[int]
    k: int
    lhs: float | None
    rhs: float | None
    holds: bool | None
    method: str
    params: dict = field(default_factory=dict)
    status: str = "ok"

    def to_json(self) -> str:
        d = asdict(self)
        order = ("check", "M", "A", "k", "params", "lhs", "rhs", "holds", "method", "status")
        return json.dumps({key: d[key] for key in order}, ensure_ascii=False)


def _alphabet(M: int, A: Iterable[int]) -> Alphabet:
    return A if isinstance(A, Alphabet) else Alphabet(M, A)


def fourier_power(S: IndexSet) -> np.ndarray:
    """``|F_N(1_S)|^2`` on all of Z_N."""
    return np.abs(unitary_dft(S.indicator(complex))) ** 2


def pair_moment(S: IndexSet, power: np.ndarray | None = None) -> float:
    """``(1/N) sum_{j,l in S} |F_N(1_S)(l - j)|^2``.

    Pairs are grouped by their difference, so the sum runs over Z_N with exact
    integer multiplicities and is accumulated with ``math.fsum``.
    """
    N = S.modulus
    g = fourier_power(S) if power is None else power
    h = difference_histogram(S)
    nz = np.flatnonzero(h)
    return math.fsum((h[nz] * g[nz]).tolist()) / N


@lru_cache(maxsize=4096)
def _tk_fft_cached(M: int, letters: tuple[int, ...], k: int) -> float:
    return pair_moment(build_cantor(Alphabet(M, letters), k))


def t_k_fft(M: int, A, k: int) -> TkRecord:
    """``t_k`` from one FFT of ``1_{C_k}`` and a sum over pairs of ``C_k``."""
    alpha = _alphabet(M, A)
    value = _tk_fft_cached(alpha.base, alpha.letters, int(k))
    return TkRecord(alpha.base, alpha.letters, k, alpha.base**k, value, FFT_PAIRSUM)


def t_k_quadruple(M: int, A, k: int, budget: int = QUADRUPLE_BUDGET) -> TkRecord:
    """``t_k = N^-2 sum_{j,l,m,n in C_k} exp(2 pi i (l-j)(m-n)/N)``, summed term by term."""
    alpha = _alphabet(M, A)
    C = build_cantor(alpha, k)
    N, n = C.modulus, len(C)
    if n**4 > budget:
        raise ScaleError(f"|C_k|^4 = {n**4} exceeds the quadruple budget {budget}")
    if N > 2**31:
        raise ScaleError("quadruple oracle limited to N <= 2**31")
    el = C.elements
    diffs = (el[None, :] - el[:, None]).ravel() % N
    angle = 2.0 * np.pi * np.arange(N) / N
    cos_t, sin_t = np.cos(angle), np.sin(angle)
    rows = max(1, 2**22 // diffs.size)
    re_parts, im_parts = [], []
    for start in range(0, diffs.size, rows):
        phase = np.multiply.outer(diffs[start:start + rows], diffs) % N
        re_parts.append(float(cos_t[phase].sum()))
        im_parts.append(float(sin_t[phase].sum()))
    re = math.fsum(re_parts) / N**2
    im = math.fsum(im_parts) / N**2
    if abs(im) > 1e-9 * max(1.0, abs(re)):
        raise BakerWeylError(f"quadruple sum has imaginary part {im:g}; index bug?")
    return TkRecord(alpha.base, alpha.letters, k, N, re, QUADRUPLE)


def t_k_singular(M: int, A, k: int, max_n: int = SVD_MAX_N) -> TkRecord:
    """``t_k`` as the sum of fourth powers of singular values of the compression."""
    alpha = _alphabet(M, A)
    C = build_cantor(alpha, k)
    if C.modulus > max_n:
        raise ScaleError(f"singular-value oracle limited to N <= {max_n}")
    s = scipy.linalg.svdvals(compression_matrix(C))
    return TkRecord(alpha.base, alpha.letters, k, C.modulus, math.fsum((s**4).tolist()), SINGULAR)


def trace_TT(M: int, A, k: int, rho: float, method: str = PAIRSUM,
             max_n: int = TRACE_MATRIX_MAX_N) -> TraceRecord:
    """``tr((T^* T)^2)`` for ``T = 1_X F_N 1_X`` with ``X`` the rho-neighborhood of ``C_k``."""
    alpha = _alphabet(M, A)
    X = neighborhood(build_cantor(alpha, k), rho)
    N = X.modulus
    if method == PAIRSUM:
        value = pair_moment(X)
    elif method == MATRIX:
        if N > max_n:
            raise ScaleError(f"matrix oracle limited to N <= {max_n}")
        mask = X.indicator()
        T = mask[:, None] * dft_matrix(N) * mask[None, :]
        G = T.conj().T @ T
        value = float(np.sum(np.abs(G) ** 2))
    else:
        raise DomainError(f"unknown trace method {method!r}")
    return TraceRecord(alpha.base, alpha.letters, k, rho, N, value, method)


def _report(check, alpha, k, lhs, rhs, holds, method, **params) -> CheckReport:
    return CheckReport(check, alpha.base, list(alpha.letters), k, lhs, rhs, holds, method, params)


def check_lemma41(M: int, A, k: int, rho: float, method: str = PAIRSUM) -> CheckReport:
    """``tr((T^*T)^2) <= 16 N^{4(1-rho)} t_k``."""
    alpha = _alphabet(M, A)
    N = alpha.base**k
    lhs = trace_TT(alpha.base, alpha, k, rho, method=method).value
    rhs = 16.0 * N ** (4.0 * (1.0 - rho)) * t_k_fft(alpha.base, alpha, k).t_k
    radius = neighborhood_radius(N, rho)
    return _report("lemma41", alpha, k, lhs, rhs, lhs <= rhs * (1 + REL_SLACK), method,
                   rho=rho, radius=radius)


def check_lemma42(M: int, A, k1: int, k2: int) -> CheckReport:
    """Submultiplicativity ``t_{k1+k2} <= t_{k1} t_{k2}``."""
    alpha = _alphabet(M, A)
    lhs = t_k_fft(alpha.base, alpha, k1 + k2).t_k
    rhs = t_k_fft(alpha.base, alpha, k1).t_k * t_k_fft(alpha.base, alpha, k2).t_k
    return _report("lemma42", alpha, k1 + k2, lhs, rhs, lhs <= rhs * (1 + REL_SLACK),
                   FFT_PAIRSUM, k1=k1, k2=k2)


def check_prop43_strict(M: int, A, k: int) -> CheckReport:
    """``t_k <= |C_k|^4 / N^2``, strictly once ``k >= 2``.

    Rejects alphabets whose dimension is 0 or 1.
    """
    alpha = _alphabet(M, A)
    alpha.require_proper()
    N = alpha.base**k
    bound = alpha.size ** (4 * k) / N**2
    tk = t_k_fft(alpha.base, alpha, k).t_k
    strict = tk < bound * (1 - STRICT_MARGIN)
    holds = strict if k >= 2 else tk <= bound * (1 + REL_SLACK)
    return _report("prop43", alpha, k, tk, bound, holds, FFT_PAIRSUM, strict=strict,
                   margin=1.0 - tk / bound)


def check_prop44(M: int, A, k: int) -> CheckReport:
    """``t_k <= N^{-3/2} |C_k|^{3/2} E(C_k)^{1/2}`` and ``||F_N 1_C||_4^4 = E(C_k)/N``."""
    alpha = _alphabet(M, A)
    C = build_cantor(alpha, k)
    N, n = C.modulus, len(C)
    energy = additive_energy(C)
    g = fourier_power(C)
    tk = t_k_fft(alpha.base, alpha, k).t_k
    rhs = N**-1.5 * n**1.5 * math.sqrt(energy)
    l4 = math.fsum((g * g).tolist())
    e_over_n = energy / N
    identity_err = abs(l4 - e_over_n) / e_over_n
    holds = tk <= rhs * (1 + REL_SLACK) and identity_err <= 1e-8
    return _report("prop44", alpha, k, tk, rhs, holds, FFT_PAIRSUM, energy=energy,
                   l4_fourth=l4, energy_over_N=e_over_n, identity_rel_err=identity_err)


@dataclass(frozen=True)
class FeketeBounds:
    """Per-depth lower bounds ``-log t_k / (4 k log M)`` on the gap exponent."""

    bounds: dict
    running_best: float
    best_k: int


def fekete_bounds(tks: Sequence[TkRecord]) -> FeketeBounds:
    if not tks:
        raise DomainError("need at least one t_k record")
    if len({(r.M, r.A) for r in tks}) != 1:
        raise DomainError("records mix different alphabets")
    bounds = {}
    for r in tks:
        if r.t_k <= 0:
            raise DomainError(f"t_k must be positive, got {r.t_k} at k={r.k}")
        bounds[r.k] = -math.log(r.t_k) / (4 * r.k * math.log(r.M))
    best_k = max(bounds, key=lambda k: (bounds[k], -k))
    return FeketeBounds(dict(sorted(bounds.items())), bounds[best_k], best_k)


def beta_E(delta: float, gamma: float) -> float:
    """Additive-energy gap ``(3/4)(1/2 - delta) + gamma/8``."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0,1), got {delta}")
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    return 0.75 * (0.5 - delta) + gamma / 8.0
