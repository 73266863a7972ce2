"""Alphabets, Cantor iterates in Z_N and their additive combinatorics.

A Cantor iterate ``C_k(M, A)`` is the set of residues in ``Z_N`` (``N = M**k``)
whose base-``M`` digits all belong to the alphabet ``A``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ScaleError

#: Largest modulus accepted for index arithmetic in int64.
MAX_MODULUS = 2**62

# Above this many ordered pairs, pair histograms are computed by FFT
# convolution and rounded (with a verified rounding margin) instead of bincount.
EXACT_PAIR_LIMIT = 2**24
_PAIR_CHUNK = 2**22


@dataclass(frozen=True)
class Alphabet:
    """Base ``M`` and the sorted tuple of admissible digits."""

    base: int
    letters: tuple[int, ...]

    def __init__(self, base: int, letters: Iterable[int]):
        base = int(base)
        letters = tuple(sorted(int(a) for a in letters))
        if base < 2:
            raise DomainError(f"base must be >= 2, got {base}")
        if not letters:
            raise DomainError("alphabet must be nonempty")
        if len(set(letters)) != len(letters):
            raise DomainError(f"repeated letters in {letters}")
        if letters[0] < 0 or letters[-1] >= base:
            raise DomainError(f"letters {letters} not in range 0..{base - 1}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "letters", letters)

    @property
    def size(self) -> int:
        return len(self.letters)

    @property
    def delta(self) -> float:
        return dimension(self)

    @property
    def is_proper(self) -> bool:
        """True when the dimension lies strictly between 0 and 1."""
        return 1 < self.size < self.base

    def require_proper(self) -> None:
        if not self.is_proper:
            raise DomainError(
                f"dimension must lie in (0,1); alphabet {list(self.letters)} "
                f"in base {self.base} has delta={self.delta:g}"
            )

    @classmethod
    def full(cls, base: int) -> "Alphabet":
        return cls(base, range(base))


def dimension(alphabet: Alphabet) -> float:
    """Return ``log|A| / log M``."""
    if alphabet.size == alphabet.base:
        return 1.0
    return math.log(alphabet.size) / math.log(alphabet.base)


def proper_alphabets(base: int) -> list[Alphabet]:
    """All alphabets of ``base`` with dimension in (0, 1), in lexicographic order."""
    from itertools import combinations

    out = []
    for size in range(2, base):
        out.extend(Alphabet(base, c) for c in combinations(range(base), size))
    return out


class IndexSet:
    """A sorted set of residues modulo ``modulus``.

    ``source`` optionally records where the set came from (base, alphabet,
    depth, rho) and is carried into the JSON form.
    """

    def __init__(self, modulus: int, members: Iterable[int], source: dict | None = None):
        modulus = int(modulus)
        if modulus < 1 or modulus > MAX_MODULUS:
            raise ScaleError(f"modulus {modulus} outside 1..2**62")
        arr = np.unique(np.asarray(list(members) if not isinstance(members, np.ndarray) else members,
                                   dtype=np.int64))
        if arr.size and (arr[0] < 0 or arr[-1] >= modulus):
            raise DomainError(f"members must lie in 0..{modulus - 1}")
        arr.setflags(write=False)
        self._modulus = modulus
        self._members = arr
        self.source = dict(source or {})

    @property
    def modulus(self) -> int:
        return self._modulus

    @property
    def members(self) -> np.ndarray:
        return self._members

    def __len__(self) -> int:
        return int(self._members.size)

    def __contains__(self, x) -> bool:
        i = np.searchsorted(self._members, x)
        return bool(i < self._members.size and self._members[i] == x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.members, other.members)

    def __repr__(self) -> str:
        return f"IndexSet(modulus={self.modulus}, size={len(self)})"

    def indicator(self, dtype=float) -> np.ndarray:
        out = np.zeros(self.modulus, dtype=dtype)
        out[self._members] = 1
        return out

    def to_dict(self) -> dict:
        d = {}
        for key in ("M", "A", "k"):
            if key in self.source:
                d[key] = self.source[key]
        d["N"] = self.modulus
        for key in ("rho", "radius"):
            if key in self.source:
                d[key] = self.source[key]
        d["elements"] = [int(x) for x in self._members]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "IndexSet":
        d = json.loads(text)
        source = {k: d[k] for k in ("M", "A", "k", "rho", "radius") if k in d}
        return cls(d["N"], d["elements"], source=source)


class CantorSet(IndexSet):
    """The iterate ``C_k`` of an alphabet; construct with :func:`build_cantor`."""

    def __init__(self, alphabet: Alphabet, depth: int, elements: np.ndarray):
        self.alphabet = alphabet
        self.depth = int(depth)
        super().__init__(
            alphabet.base**depth,
            elements,
            source={"M": alphabet.base, "A": list(alphabet.letters), "k": self.depth},
        )

    @property
    def elements(self) -> np.ndarray:
        return self.members

    def __repr__(self) -> str:
        return (f"CantorSet(M={self.alphabet.base}, A={list(self.alphabet.letters)}, "
                f"k={self.depth}, size={len(self)})")

    @classmethod
    def from_json(cls, text: str) -> "CantorSet":
        d = json.loads(text)
        c = build_cantor(Alphabet(d["M"], d["A"]), d["k"])
        if d.get("N", c.modulus) != c.modulus or list(c.elements) != list(d["elements"]):
            raise DomainError("serialized elements disagree with (M, A, k)")
        return c


def build_cantor(alphabet: Alphabet, k: int) -> CantorSet:
    """Return ``C_k``: all ``sum a_j M**j`` with digits in the alphabet, ascending."""
    k = int(k)
    if k < 1:
        raise DomainError(f"depth must be >= 1, got {k}")
    M = alphabet.base
    if M**k > MAX_MODULUS:
        raise ScaleError(f"M**k = {M}**{k} exceeds 2**62")
    letters = np.asarray(alphabet.letters, dtype=np.int64)
    elems = letters.copy()
    scale = 1
    for _ in range(k - 1):
        scale *= M
        # leading digit outermost keeps the result sorted since elems < scale
        elems = np.add.outer(letters * scale, elems).ravel()
    return CantorSet(alphabet, k, elems)


def split_digits(C: CantorSet, k1: int) -> tuple[CantorSet, CantorSet]:
    """Return ``(C_{k1}, C_{k2})`` with ``C_k = M**k2 * C_{k1} + C_{k2}``."""
    k2 = C.depth - k1
    if k1 < 1 or k2 < 1:
        raise DomainError(f"split {k1}+{k2} of depth {C.depth} is not proper")
    return build_cantor(C.alphabet, k1), build_cantor(C.alphabet, k2)


def neighborhood_radius(N: int, rho: float) -> int:
    """``floor(2 N**(1-rho))``; at least 2 whenever ``rho < 1``."""
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0,1), got {rho}")
    return int(math.floor(2.0 * N ** (1.0 - rho)))


def neighborhood(C: IndexSet, rho: float | None = None, radius: int | None = None) -> IndexSet:
    """Union of the translates ``C + m`` in Z_N over ``|m| <= radius``.

    Give either ``rho`` (radius ``floor(2 N**(1-rho))``) or an explicit ``radius``.
    """
    N = C.modulus
    if (rho is None) == (radius is None):
        raise DomainError("give exactly one of rho and radius")
    if rho is not None:
        radius = neighborhood_radius(N, rho)
        source = dict(C.source, rho=rho)
    else:
        radius = int(radius)
        if radius < 0:
            raise DomainError(f"radius must be >= 0, got {radius}")
        source = dict(C.source, radius=radius)
    if 2 * radius + 1 >= N:
        return IndexSet(N, np.arange(N, dtype=np.int64), source=source)
    if radius == 0:
        return IndexSet(N, C.members, source=source)
    ind = np.zeros(N, dtype=np.int64)
    ind[C.members] = 1
    ext = np.concatenate([ind[N - radius:], ind, ind[:radius]])
    cs = np.concatenate([[0], np.cumsum(ext)])
    width = 2 * radius + 1
    window = cs[width:] - cs[:-width]
    return IndexSet(N, np.flatnonzero(window > 0), source=source)


def _cyclic_pair_histogram(members: np.ndarray, N: int, difference: bool = False) -> np.ndarray:
    """Histogram over Z_N of ``a + b`` (or ``a - b``) for ordered pairs of members.

    Exact integers. Large inputs go through an FFT (auto)convolution whose
    rounding is checked to leave a margin well below 1/2.
    """
    n = members.size
    if n * n <= EXACT_PAIR_LIMIT:
        hist = np.zeros(N, dtype=np.int64)
        rows = max(1, _PAIR_CHUNK // max(n, 1))
        other = -members if difference else members
        for start in range(0, n, rows):
            block = np.add.outer(members[start:start + rows], other) % N
            hist += np.bincount(block.ravel(), minlength=N)
        return hist
    ind = np.zeros(N)
    ind[members] = 1.0
    f = np.fft.fft(ind)
    spec = f * np.conj(f) if difference else f * f
    raw = np.fft.ifft(spec).real
    hist = np.rint(raw)
    if np.max(np.abs(raw - hist)) > 0.1:
        raise ScaleError("FFT pair histogram lost integer precision")
    hist = hist.astype(np.int64)
    if int(hist.sum()) != n * n:
        raise ScaleError("FFT pair histogram does not account for every pair")
    return hist


def sum_histogram(S: IndexSet) -> np.ndarray:
    """``h(s) = #{(a, b) in S^2 : a + b = s mod N}``."""
    return _cyclic_pair_histogram(S.members, S.modulus)


def difference_histogram(S: IndexSet) -> np.ndarray:
    """``h(d) = #{(a, b) in S^2 : a - b = d mod N}``."""
    return _cyclic_pair_histogram(S.members, S.modulus, difference=True)


def additive_energy(S: IndexSet) -> int:
    """Number of quadruples ``(a, b, c, d)`` in ``S**4`` with ``a + b = c + d mod N``."""
    if len(S) == 0:
        return 0
    h = sum_histogram(S)
    if len(S) ** 3 < 2**62:
        return int(np.dot(h, h))
    return sum(int(x) * int(x) for x in h[h > 0])


def additive_energy_bruteforce(S: IndexSet) -> int:
    """Quadruple count by direct enumeration; only for small sets."""
    m = S.members
    if m.size > 60:
        raise ScaleError("brute-force energy limited to |S| <= 60")
    N = S.modulus
    sums = np.add.outer(m, m) % N
    lhs = sums[:, :, None, None]
    rhs = sums[None, None, :, :]
    return int(np.count_nonzero(lhs == rhs))


@dataclass(frozen=True)
class GammaFit:
    """Least-squares fit of ``log E(C_k)`` against ``log N``."""

    gamma: float
    slope: float
    intercept: float
    residual: float
    ks: tuple[int, ...] = field(default=())


def gamma_fit(alphabet: Alphabet, energies: Sequence[tuple[int, int]], k_min: int = 3) -> GammaFit:
    """Empirical energy-decay exponent ``3 delta - slope``.

    Parameters
    ----------
    alphabet : Alphabet
        Alphabet the energies were computed for.
    energies : sequence of (k, E)
        Additive energies of ``C_k``; ``k`` strictly increasing.
    k_min : int
        Points with ``k < k_min`` are dropped before fitting.
    """
    ks = [int(k) for k, _ in energies]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError("energies must be listed with strictly increasing k")
    pts = [(int(k), int(e)) for k, e in energies if k >= k_min]
    if len(pts) < 3:
        raise DomainError(f"need >= 3 points with k >= {k_min}, got {len(pts)}")
    if any(e <= 0 for _, e in pts):
        raise DomainError("energies must be positive")
    logM = math.log(alphabet.base)
    x = np.array([k * logM for k, _ in pts])
    y = np.array([math.log(e) for _, e in pts])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ np.array([slope, intercept]) - y))
    return GammaFit(
        gamma=3.0 * dimension(alphabet) - float(slope),
        slope=float(slope),
        intercept=float(intercept),
        residual=resid,
        ks=tuple(k for k, _ in pts),
    )
