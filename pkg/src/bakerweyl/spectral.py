"""Spectra, resonance counting, and norms of compressed Fourier operators."""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from . import __version__
from .cantor import IndexSet
from .errors import ConvergenceError, DomainError, ScaleError
from .fourier import unitary_dft, unitary_idft
from .qbaker import DENSE_CAP, BakerSpec, build_baker

BOUNDARY_TOL = 1e-12
POWER_TOL = 1e-10
POWER_MAXITER = 100_000


@dataclass
class SpectrumResult:
    """Eigenvalues of one dense operator, repeated by algebraic multiplicity."""

    N: int
    eigenvalues: np.ndarray
    backward_error: float
    trace: complex
    frobenius_sq: float
    k: int | None = None
    solver: dict = field(default_factory=dict)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    def trace_defect(self) -> float:
        """Relative mismatch between the eigenvalue sum and the matrix trace."""
        scale = max(abs(self.trace), 1.0)
        return abs(complex(np.sum(self.eigenvalues)) - self.trace) / scale

    def schur_defect(self) -> float:
        """``sum |lambda|^2 - ||A||_F^2``; nonpositive up to rounding."""
        return float(np.sum(self.moduli**2)) - self.frobenius_sq

    def to_csv(self, fingerprint: str = "", nu0: float | None = None, M: int | None = None) -> str:
        """CSV rows ``k,N,re,im,abs``; with ``nu0`` and ``M`` an ``in_omega`` column is added."""
        buf = io.StringIO()
        buf.write(f"# spec={fingerprint} version={__version__}\n")
        label = nu0 is not None and M is not None
        buf.write("k,N,re,im,abs" + (",in_omega" if label else "") + "\n")
        k = "" if self.k is None else self.k
        for lam in self.eigenvalues:
            row = f"{k},{self.N},{float(lam.real)!r},{float(lam.imag)!r},{float(abs(lam))!r}"
            if label:
                row += f",{int(in_omega(lam, M, nu0))}"
            buf.write(row + "\n")
        return buf.getvalue()


def eigenvalues(A: np.ndarray, k: int | None = None, dense_cap: int = DENSE_CAP) -> SpectrumResult:
    """All eigenvalues of a dense square matrix via a complex Schur decomposition.

    LAPACK reduces to Hessenberg form and runs shifted QR; the backward error
    ``||A - Z T Z^*||_F / ||A||_F`` of the returned factorization is recorded.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    N = A.shape[0]
    if N > dense_cap:
        raise ScaleError(f"N={N} exceeds the dense cap {dense_cap}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has NaN or infinite entries")
    try:
        T, Z = scipy.linalg.schur(A, output="complex")
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"QR iteration failed: {exc}") from exc
    fro = float(np.linalg.norm(A))
    resid = float(np.linalg.norm(A - Z @ T @ Z.conj().T))
    lam = np.diag(T).copy()
    return SpectrumResult(
        N=N,
        eigenvalues=lam,
        backward_error=resid / fro if fro else resid,
        trace=complex(np.trace(A)),
        frobenius_sq=fro**2,
        k=k,
        solver={"method": "lapack-complex-schur"},
    )


def in_omega(lam, M: int, nu0: float):
    """Membership in the annulus ``M**-nu0 < |lambda| < 3``."""
    r = np.abs(lam)
    return (r > float(M) ** (-nu0)) & (r < 3.0)


def count_resonances(spectrum: SpectrumResult | np.ndarray, nu: float, M: int) -> int:
    """``#{lambda : |lambda| >= M**-nu}`` with multiplicity."""
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    lam = spectrum.eigenvalues if isinstance(spectrum, SpectrumResult) else np.asarray(spectrum)
    threshold = float(M) ** (-nu) - BOUNDARY_TOL
    return int(np.count_nonzero(np.abs(lam) >= threshold))


@dataclass
class CountingCurve:
    """Records ``(k, N, nu, count)`` for a family of specs differing only in depth."""

    fingerprint: str
    M: int
    delta: float
    records: list[tuple[int, int, float, int]] = field(default_factory=list)

    def counts(self, nu: float) -> list[tuple[int, int, int]]:
        return [(k, N, c) for k, N, v, c in self.records if v == nu]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# spec={self.fingerprint} version={__version__}\n")
        buf.write("k,N,nu,count\n")
        for k, N, nu, c in self.records:
            buf.write(f"{k},{N},{nu!r},{c}\n")
        return buf.getvalue()


def compute_spectra(spec: BakerSpec, ks: Iterable[int], jobs: int = 1,
                    dense_cap: int = DENSE_CAP) -> dict[int, SpectrumResult]:
    """Dense spectra of ``B_N`` for each depth, optionally in parallel."""
    ks = list(ks)
    for k in ks:
        if spec.M**k > dense_cap:
            raise ScaleError(f"k={k} gives N={spec.M**k} above the dense cap {dense_cap}")

    def one(k):
        return eigenvalues(build_baker(spec.with_depth(k), dense_cap=dense_cap), k=k, dense_cap=dense_cap)

    if jobs > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, ks))
    else:
        results = [one(k) for k in ks]
    return dict(zip(ks, results))


def counting_curve(spec: BakerSpec, ks: Iterable[int], nus: Sequence[float], jobs: int = 1,
                   dense_cap: int = DENSE_CAP, spectra: dict[int, SpectrumResult] | None = None
                   ) -> CountingCurve:
    """Count resonances for every ``(k, nu)``; one eigensolve per depth."""
    ks = sorted(ks)
    if spectra is None:
        spectra = compute_spectra(spec, ks, jobs=jobs, dense_cap=dense_cap)
    curve = CountingCurve(spec.fingerprint(include_depth=False), spec.M, spec.alphabet.delta)
    for k in ks:
        for nu in nus:
            curve.records.append((k, spec.M**k, float(nu), count_resonances(spectra[k], nu, spec.M)))
    return curve


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    rss: float
    ks: tuple[int, ...]
    nu: float
    theory: float | None = None


def fit_exponent(curve: CountingCurve, nu: float, krange: Iterable[int] | None = None,
                 theory: float | None = None) -> ExponentFit:
    """OLS slope of ``log N_k(nu)`` against ``log N`` over the chosen depths.

    Zero counts are dropped; at least three usable depths are required.
    """
    wanted = None if krange is None else set(krange)
    pts = [(k, N, c) for k, N, c in curve.counts(float(nu))
           if c > 0 and (wanted is None or k in wanted)]
    if len(pts) < 3:
        raise DomainError(f"need >= 3 depths with nonzero counts at nu={nu}, got {len(pts)}")
    x = np.array([math.log(N) for _, N, _ in pts])
    y = np.array([math.log(c) for _, _, c in pts])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rss = float(np.sum((A @ coef - y) ** 2))
    return ExponentFit(float(coef[0]), float(coef[1]), rss, tuple(k for k, _, _ in pts), float(nu), theory)


# Norms ---------------------------------------------------------------------

def _power_norm(apply: Callable, apply_adj: Callable, x0: np.ndarray, restart: np.ndarray,
                tol: float, maxiter: int) -> float:
    """Largest singular value by power iteration on ``A^* A``.

    The estimate ``||A x||`` with ``||x|| = 1`` is nondecreasing and never
    exceeds the true norm.
    """
    x = x0 / np.linalg.norm(x0)
    restarted = False
    prev = 0.0
    for _ in range(maxiter):
        y = apply(x)
        est = float(np.linalg.norm(y))
        if est == 0.0:
            if restarted:
                return 0.0
            restarted = True
            x = restart / np.linalg.norm(restart)
            prev = 0.0
            continue
        if abs(est - prev) <= tol * est:
            return est
        prev = est
        z = apply_adj(y)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return est
        x = z / nz
    raise ConvergenceError(f"power iteration did not converge in {maxiter} steps",
                           interval=(prev, est))


def _start_vectors(n: int) -> tuple[np.ndarray, np.ndarray]:
    x0 = np.ones(n, dtype=np.complex128)
    alt = np.zeros(n, dtype=np.complex128)
    alt[0] = 1.0
    if n > 1:
        alt[1] = 1.0
    return x0, alt


def operator_norm(op, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER) -> float:
    """Spectral norm of a dense matrix or ``LinearOperator`` by power iteration."""
    lin = aslinearoperator(op)
    n = lin.shape[1]
    x0, alt = _start_vectors(n)
    return _power_norm(lin.matvec, lin.rmatvec, x0, alt, tol, maxiter)


def compression(S: IndexSet) -> LinearOperator:
    """``1_S F_N 1_S`` acting on vectors supported on ``S`` (length ``|S|``)."""
    N, idx = S.modulus, S.members

    def embed(v):
        u = np.zeros(N, dtype=np.complex128)
        u[idx] = np.ravel(v)
        return u

    n = len(S)
    return LinearOperator(
        (n, n),
        matvec=lambda v: unitary_dft(embed(v))[idx],
        rmatvec=lambda v: unitary_idft(embed(v))[idx],
        dtype=np.complex128,
    )


def compression_matrix(S: IndexSet) -> np.ndarray:
    """The nonzero ``|S| x |S|`` block of ``1_S F_N 1_S``."""
    N = S.modulus
    if N > 2**31:
        raise ScaleError("dense compression limited to N <= 2**31")
    idx = S.members
    phase = (np.outer(idx, idx) % N).astype(np.float64)
    return np.exp(-2j * np.pi * phase / N) / math.sqrt(N)


def r_k(C: IndexSet, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER) -> float:
    """``||1_C F_N 1_C||`` by matrix-free power iteration from the all-ones vector."""
    op = compression(C)
    x0, alt = _start_vectors(len(C))
    return _power_norm(op.matvec, op.rmatvec, x0, alt, tol, maxiter)


def r_k_dense(C: IndexSet, max_modulus: int = 1024) -> float:
    """Dense SVD value of ``r_k`` for small moduli."""
    if C.modulus > max_modulus:
        raise ScaleError(f"dense r_k limited to N <= {max_modulus}")
    return float(scipy.linalg.svdvals(compression_matrix(C))[0])
