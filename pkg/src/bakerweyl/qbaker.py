"""Quantum open baker's maps ``B_N = F_N^* diag(chi F_{N/M} chi, ...) I_{A,M}``.

Operators come in two forms: a dense ``numpy`` matrix (built from explicit
DFT kernels) and a matrix-free :class:`scipy.sparse.linalg.LinearOperator`
backed by the mixed-radix FFT in :mod:`bakerweyl.fourier`.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .cantor import MAX_MODULUS, Alphabet
from .errors import DomainError, ScaleError
from .fourier import dft_matrix, unitary_dft, unitary_idft

DENSE_CAP = 4096

INDICATOR_ONE = "indicator-one"
SMOOTH_BUMP = "smooth-bump"


def _ramp(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    r0 = _ramp(t)
    r1 = _ramp(1.0 - t)
    return r0 / (r0 + r1)


@dataclass(frozen=True)
class Cutoff:
    """Cutoff ``chi`` on [0, 1].

    ``smooth-bump`` is 0 on ``[0, eps_s]``, 1 on ``[a, 1 - a]`` and symmetric
    about 1/2, with ``e^{-1/t}`` ramps in between. ``indicator-one`` is
    ``chi = 1`` on [0, 1].
    """

    kind: str = SMOOTH_BUMP
    a: float = 0.3
    eps_s: float = 0.1

    def __post_init__(self):
        if self.kind not in (INDICATOR_ONE, SMOOTH_BUMP):
            raise DomainError(f"unknown cutoff kind {self.kind!r}")
        if self.kind == SMOOTH_BUMP and not 0 < self.eps_s < self.a < 0.5:
            raise DomainError(f"need 0 < eps_s < a < 1/2, got a={self.a}, eps_s={self.eps_s}")

    @classmethod
    def indicator(cls) -> "Cutoff":
        return cls(INDICATOR_ONE)

    @classmethod
    def smooth(cls, a: float = 0.3, eps_s: float = 0.1) -> "Cutoff":
        return cls(SMOOTH_BUMP, a, eps_s)

    def profile(self, m: np.ndarray) -> np.ndarray:
        """Value as a function of the distance ``m = min(x, 1-x)`` to the boundary."""
        m = np.asarray(m, dtype=float)
        if self.kind == INDICATOR_ONE:
            return np.ones_like(m)
        return _smoothstep((m - self.eps_s) / (self.a - self.eps_s))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= 1)
        vals = self.profile(np.minimum(x, 1.0 - x))
        return np.where(inside, vals, 0.0)

    def to_dict(self) -> dict:
        if self.kind == INDICATOR_ONE:
            return {"kind": self.kind}
        return {"kind": self.kind, "a": self.a, "eps_s": self.eps_s}


def discretize_cutoff(chi: Cutoff, N: int, M: int) -> np.ndarray:
    """Samples ``chi(M j / N)`` for ``j = 0 .. N/M - 1``."""
    if N % M:
        raise DomainError(f"M={M} does not divide N={N}")
    L = N // M
    j = np.arange(L)
    # integer reflection makes the samples exactly symmetric
    return chi.profile(np.minimum(j, L - j) / L)


@dataclass(frozen=True)
class BakerSpec:
    """Alphabet, cutoff and depth ``k`` of one operator ``B_N``, ``N = M**k``."""

    alphabet: Alphabet
    cutoff: Cutoff
    depth: int

    def __post_init__(self):
        if self.depth < 2:
            raise DomainError(f"depth must be >= 2, got {self.depth}")
        if self.alphabet.base**self.depth > MAX_MODULUS:
            raise ScaleError("M**k exceeds 2**62")

    @property
    def M(self) -> int:
        return self.alphabet.base

    @property
    def N(self) -> int:
        return self.alphabet.base**self.depth

    @property
    def block(self) -> int:
        return self.N // self.M

    def with_depth(self, k: int) -> "BakerSpec":
        return BakerSpec(self.alphabet, self.cutoff, k)

    def to_dict(self, include_depth: bool = True) -> dict:
        d = {"M": self.M, "A": list(self.alphabet.letters), "cutoff": self.cutoff.to_dict()}
        if include_depth:
            d["k"] = self.depth
        return d

    def fingerprint(self, include_depth: bool = True) -> str:
        blob = json.dumps(self.to_dict(include_depth), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def dft(N: int, form: str = "matrix-free") -> LinearOperator | np.ndarray:
    """The unitary DFT ``F_N`` as a dense matrix or an FFT-backed operator."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if form == "dense":
        return dft_matrix(N)
    if form != "matrix-free":
        raise DomainError(f"unknown operator form {form!r}")
    return LinearOperator(
        (N, N),
        matvec=lambda u: unitary_dft(np.ravel(u)),
        rmatvec=lambda u: unitary_idft(np.ravel(u)),
        matmat=lambda U: unitary_dft(U, axis=0),
        rmatmat=lambda U: unitary_idft(U, axis=0),
        dtype=np.complex128,
    )


def alphabet_mask(spec: BakerSpec) -> np.ndarray:
    """Diagonal of ``I_{A,M}``: True where ``floor(M j / N)`` is a letter."""
    leading = np.arange(spec.N) // spec.block
    return np.isin(leading, spec.alphabet.letters)


def build_baker(spec: BakerSpec, form: str = "dense", dense_cap: int = DENSE_CAP):
    """Return ``B_N`` for ``spec`` as a dense matrix or a matrix-free operator."""
    if form == "matrix-free":
        return baker_operator(spec)
    if form != "dense":
        raise DomainError(f"unknown operator form {form!r}")
    N, L = spec.N, spec.block
    if N > dense_cap:
        raise ScaleError(f"N={N} exceeds the dense cap {dense_cap}")
    chi = discretize_cutoff(spec.cutoff, N, spec.M)
    inner = chi[:, None] * dft_matrix(L) * chi[None, :]
    f_star = dft_matrix(N).conj().T
    out = np.zeros((N, N), dtype=np.complex128)
    for b in spec.alphabet.letters:
        cols = slice(b * L, (b + 1) * L)
        out[:, cols] = f_star[:, cols] @ inner
    return out


def _apply(spec: BakerSpec, U: np.ndarray, chi: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # U has the position index on axis 0
    M, L = spec.M, spec.block
    V = U * mask.reshape((-1,) + (1,) * (U.ndim - 1))
    V = V.reshape((M, L) + U.shape[1:])
    c = chi.reshape((1, L) + (1,) * (U.ndim - 1))
    W = c * unitary_dft(c * V, radix=M, axis=1)
    return unitary_idft(W.reshape(U.shape), radix=M, axis=0)


def _apply_adjoint(spec: BakerSpec, U: np.ndarray, chi: np.ndarray, mask: np.ndarray) -> np.ndarray:
    M, L = spec.M, spec.block
    V = unitary_dft(U, radix=M, axis=0).reshape((M, L) + U.shape[1:])
    c = chi.reshape((1, L) + (1,) * (U.ndim - 1))
    W = (c * unitary_idft(c * V, radix=M, axis=1)).reshape(U.shape)
    return W * mask.reshape((-1,) + (1,) * (U.ndim - 1))


def baker_operator(spec: BakerSpec) -> LinearOperator:
    """Matrix-free ``B_N``; each apply costs two FFT passes of size N."""
    chi = discretize_cutoff(spec.cutoff, spec.N, spec.M)
    mask = alphabet_mask(spec)
    return LinearOperator(
        (spec.N, spec.N),
        matvec=lambda u: _apply(spec, np.ravel(u).astype(np.complex128), chi, mask),
        rmatvec=lambda u: _apply_adjoint(spec, np.ravel(u).astype(np.complex128), chi, mask),
        matmat=lambda U: _apply(spec, np.asarray(U, dtype=np.complex128), chi, mask),
        rmatmat=lambda U: _apply_adjoint(spec, np.asarray(U, dtype=np.complex128), chi, mask),
        dtype=np.complex128,
    )


def apply_baker(spec: BakerSpec, u) -> np.ndarray:
    """``B_N u`` without materializing the matrix."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (spec.N,):
        raise DomainError(f"vector of shape {u.shape} does not match N={spec.N}")
    if not np.all(np.isfinite(u)):
        raise DomainError("vector has non-finite entries")
    return _apply(spec, u, discretize_cutoff(spec.cutoff, spec.N, spec.M), alphabet_mask(spec))


# Binary export -------------------------------------------------------------

MATRIX_MAGIC = b"BKW1"
ROW_MAJOR = 0


def write_matrix(path, A: np.ndarray) -> None:
    """Write a square complex matrix: ``BKW1``, u64 N, u8 layout, then (re, im) pairs."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC + struct.pack("<QB", A.shape[0], ROW_MAJOR))
        fh.write(np.ascontiguousarray(A).astype("<c16").tobytes())


def read_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MATRIX_MAGIC:
        raise DomainError("not a BKW1 matrix file")
    n, layout = struct.unpack_from("<QB", data, 4)
    if layout != ROW_MAJOR:
        raise DomainError(f"unsupported layout {layout}")
    body = data[13:]
    if len(body) != 16 * n * n:
        raise DomainError("truncated matrix file")
    return np.frombuffer(body, dtype="<c16").reshape(n, n).astype(np.complex128)


def write_vector(path, u) -> None:
    u = np.asarray(u, dtype=np.complex128).ravel()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", u.size))
        fh.write(u.astype("<c16").tobytes())


def read_vector(path) -> np.ndarray:
    data = Path(path).read_bytes()
    (n,) = struct.unpack_from("<Q", data, 0)
    if len(data) != 8 + 16 * n:
        raise DomainError("truncated vector file")
    return np.frombuffer(data[8:], dtype="<c16").astype(np.complex128)

