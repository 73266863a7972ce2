"""Closed-form resonance-counting and resolvent exponents for overlays."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import DomainError


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0,1), got {delta}")


@dataclass(frozen=True)
class GapInputs:
    """Gap exponents fed to the exponent formulas. Any of them may be absent."""

    delta: float
    beta_bd: float | None = None
    beta: float | None = None
    beta_e: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        _check_delta(self.delta)
        floor = 0.5 - self.delta
        if self.beta_bd is not None:
            if self.beta_bd <= floor:
                raise DomainError(f"beta_BD={self.beta_bd} must exceed 1/2 - delta = {floor:g}")
            if self.beta_bd > floor + self.delta / 8:
                warnings.warn(f"beta_BD={self.beta_bd} is above the sanity bound "
                              f"1/2 - delta + delta/8 = {floor + self.delta / 8:g}", stacklevel=3)
        if self.beta is not None and self.beta <= floor:
            warnings.warn(f"beta={self.beta} does not exceed 1/2 - delta = {floor:g}", stacklevel=3)


def m_thm11(nu: float, delta: float, beta_bd: float) -> float:
    """Surface exponent ``min(4(nu - beta_BD), 2(nu - (1/2 - delta)), delta)``."""
    _check_delta(delta)
    return min(4.0 * (nu - beta_bd), 2.0 * (nu - (0.5 - delta)), delta)


def c_thm12(nu: float, delta: float, beta_bd: float) -> float:
    """Resolvent exponent ``(1 + (1 - delta - 2 beta_BD)/(1 - delta - 2 nu)) nu``.

    Defined for ``0 < nu < beta_BD``; ``nu = beta_BD`` is allowed for continuity.
    """
    _check_delta(delta)
    if beta_bd <= 0:
        raise DomainError(f"beta_BD must be positive, got {beta_bd}")
    if not 0 < nu <= beta_bd:
        raise DomainError(f"nu={nu} outside (0, beta_BD={beta_bd}]")
    denom = 1.0 - delta - 2.0 * nu
    if denom <= 0:
        raise DomainError(f"1 - delta - 2 nu = {denom:g} must be positive")
    return (1.0 + (1.0 - delta - 2.0 * beta_bd) / denom) * nu


def m_thm13(nu: float, delta: float, beta: float, beta_e: float) -> float:
    """Baker exponent ``min(4(nu - beta), 4(nu - beta_E), 2(nu - (1/2 - delta)), delta)``."""
    _check_delta(delta)
    return min(4.0 * (nu - beta), 4.0 * (nu - beta_e), 2.0 * (nu - (0.5 - delta)), delta)


def exponent_grid(nus, gaps: GapInputs) -> list[dict]:
    """Evaluate every formula whose inputs are present, one row per ``nu``.

    Entries outside a formula's domain are ``None``.
    """
    rows = []
    for nu in nus:
        row = {"nu": float(nu)}
        if gaps.beta_bd is not None:
            row["m_thm11"] = m_thm11(nu, gaps.delta, gaps.beta_bd)
            try:
                row["c_thm12"] = c_thm12(nu, gaps.delta, gaps.beta_bd)
            except DomainError:
                row["c_thm12"] = None
        if gaps.beta is not None and gaps.beta_e is not None:
            row["m_thm13"] = m_thm13(nu, gaps.delta, gaps.beta, gaps.beta_e)
        rows.append(row)
    return rows
