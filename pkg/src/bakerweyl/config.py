"""Plain-text ``key = value`` experiment configuration.

Lines hold ``key = value``; ``#`` starts a comment. Lists are comma
separated, and integer lists also accept ``a..b`` ranges (inclusive).
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

from .cantor import Alphabet
from .errors import ConfigError, DomainError
from .qbaker import DENSE_CAP, Cutoff

CHECKS = ("tk", "rk", "trace", "lemma41", "lemma42", "prop43", "prop44", "fekete")


def _int_list(text: str) -> list[int]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(p) for p in (q.strip() for q in text.split(",")) if p]


def _str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _opt_float_or(word: str):
    def parse(text: str):
        return text if text == word else float(text)
    return parse


_PARSERS = {
    "M": int,
    "letters": _int_list,
    "cutoff": str,
    "a": float,
    "eps_s": float,
    "k": _int_list,
    "nu": _float_list,
    "rho": _float_list,
    "dense_cap": int,
    "output": str,
    "checks": _str_list,
    "jobs": int,
    "fit_nu": _float_list,
    "fit_k": _int_list,
    "energy_k_min": int,
    "beta_bd": float,
    "beta": _opt_float_or("fekete"),
    "gamma": _opt_float_or("fit"),
    "theory_grid": _float_list,
    "nu0": float,
}


@dataclass
class ExperimentConfig:
    M: int
    letters: list[int]
    cutoff: str = "smooth-bump"
    a: float = 0.3
    eps_s: float = 0.1
    k: list[int] = field(default_factory=list)
    nu: list[float] = field(default_factory=lambda: [0.5, 1.0])
    rho: list[float] = field(default_factory=lambda: [0.6, 0.8, 0.95])
    dense_cap: int = DENSE_CAP
    output: str = "results"
    checks: list[str] = field(default_factory=lambda: list(CHECKS))
    jobs: int = 0
    fit_nu: list[float] | None = None
    fit_k: list[int] | None = None
    energy_k_min: int = 3
    beta_bd: float | None = None
    beta: float | str | None = None
    gamma: float | str | None = None
    theory_grid: list[float] = field(default_factory=lambda: [0.0, 1.0, 101])
    nu0: float | None = None

    def __post_init__(self):
        try:
            self.alphabet = Alphabet(self.M, self.letters)
            self.cutoff_obj = (Cutoff.indicator() if self.cutoff == "indicator-one"
                               else Cutoff(self.cutoff, self.a, self.eps_s))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        self.letters = list(self.alphabet.letters)
        self.k = sorted(set(self.k))
        if any(k < 1 for k in self.k):
            raise ConfigError("depths must be >= 1")
        if any(v < 0 for v in self.nu):
            raise ConfigError("nu values must be >= 0")
        if any(not 0 < r < 1 for r in self.rho):
            raise ConfigError("rho values must lie in (0,1)")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ConfigError(f"unknown checks {sorted(unknown)}; choose from {CHECKS}")
        self.nu = [float(v) for v in self.nu]
        self.theory_grid = [float(v) for v in self.theory_grid]
        if len(self.theory_grid) != 3 or self.theory_grid[2] < 2:
            raise ConfigError("theory_grid must be 'start, stop, count' with count >= 2")
        if self.jobs < 0:
            raise ConfigError("jobs must be >= 0 (0 means one per core)")

    @property
    def worker_count(self) -> int:
        return self.jobs or os.cpu_count() or 1

    @property
    def fit_nus(self) -> list[float]:
        return self.nu if self.fit_nu is None else self.fit_nu

    @property
    def fit_ks(self) -> list[int]:
        return self.k if self.fit_k is None else self.fit_k

    def theory_nus(self) -> list[float]:
        start, stop, count = self.theory_grid
        count = int(count)
        return [start + (stop - start) * i / (count - 1) for i in range(count)]

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _PARSERS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            try:
                values[key] = _PARSERS[key](value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
        for required in ("M", "letters"):
            if required not in values:
                raise ConfigError(f"missing required key {required!r}")
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def resolved_text(self) -> str:
        """Canonical form of every experiment key.

        ``output`` and ``jobs`` only say where and how fast to run, so they are
        left out; the text parses back to an equivalent config.
        """
        lines = []
        for key in _PARSERS:
            if key in ("output", "jobs"):
                continue
            value = getattr(self, key)
            if value is None:
                continue
            if isinstance(value, list):
                if key in ("k", "letters", "fit_k") and value:
                    text = ", ".join(str(int(v)) for v in value)
                else:
                    text = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.resolved_text().encode()).hexdigest()
