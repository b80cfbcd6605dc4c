"""Optimal fractions, trading direction and the drift coefficient f."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import (
    CrraPreference,
    DomainError,
    Premiums,
    _check_kappa,
)
from .worst_case import Mode, WorstCase, mode_of, select_worst_case

FLAT_TOL = 1e-12


class Direction(enum.Enum):
    LONG = "Long"
    FLAT = "Flat"
    SHORT = "Short"


@dataclass(frozen=True)
class StrategyResult:
    pi_star: float
    myopic: float
    hedging: float
    direction: Direction
    total_premium: float


def classify_direction(prem: Premiums) -> Direction:
    if prem.total > FLAT_TOL:
        return Direction.LONG
    if prem.total < -FLAT_TOL:
        return Direction.SHORT
    return Direction.FLAT


def optimal_fraction(worst: WorstCase, kappa: float, g_t: float, r: float) -> StrategyResult:
    """Fraction of wealth in the risky asset under the worst-case belief.

    Split into the myopic part (mu* - r) / ((1 - kappa) sigma*^2) and the
    hedging part g / (1 - kappa) driven by the volatility of U itself.
    """
    _check_kappa(kappa)
    s = worst.sigma_sq_star
    if not s > 0:
        raise DomainError(f"sigma*^2 must be positive, got {s!r}")
    myopic = (worst.mu_star - r) / ((1.0 - kappa) * s)
    hedging = g_t / (1.0 - kappa)
    return StrategyResult(
        pi_star=myopic + hedging,
        myopic=myopic,
        hedging=hedging,
        direction=classify_direction(worst.premiums_at_star),
        total_premium=worst.premiums_at_star.total,
    )


def general_feedback_strategy(
    u_x: float,
    u_xx: float,
    eta_x: float,
    mu: float,
    sigma_sq: float,
    r: float,
    x: float,
) -> float:
    """Optimal fraction for an arbitrary smooth performance field, in feedback form."""
    if not u_xx < 0:
        raise DomainError(f"U_xx must be negative for a concave performance, got {u_xx!r}")
    if not x > 0:
        raise DomainError(f"wealth must be positive, got {x!r}")
    if not sigma_sq > 0:
        raise DomainError(f"sigma_sq must be positive, got {sigma_sq!r}")
    return -(eta_x * sigma_sq + (mu - r) * u_x) / (x * sigma_sq * u_xx)


def drift_coefficient_f(mode: Mode, worst: WorstCase, kappa: float, g_t: float, r: float) -> float:
    """Drift coefficient of log_scale that makes the optimal drift vanish.

    Every ambiguity mode reduces to the no-ambiguity formula evaluated at
    its worst case.
    """
    _check_kappa(kappa)
    if worst.mode is not mode:
        raise DomainError(f"worst case was selected for {worst.mode.value}, not {mode.value}")
    s = worst.sigma_sq_star
    excess = worst.mu_star - r
    return g_t * g_t * s / (2.0 * (kappa - 1.0)) + kappa / (kappa - 1.0) * (
        0.5 * excess * excess / s + excess * g_t
    )


@dataclass(frozen=True)
class Calibration:
    """A preference with f filled in, plus the per-segment solution."""

    preference: CrraPreference
    worst: tuple[WorstCase, ...]
    strategy: tuple[StrategyResult, ...]


def calibrate(pref: CrraPreference, spec, r: float, paper_a: bool = False) -> Calibration:
    """Solve each g-segment and return the preference with f populated."""
    mode = mode_of(spec)
    worsts, strategies, fs = [], [], []
    for g_t in pref.g:
        w = select_worst_case(spec, pref.kappa, g_t, r, paper_a=paper_a)
        worsts.append(w)
        strategies.append(optimal_fraction(w, pref.kappa, g_t, r))
        fs.append(drift_coefficient_f(mode, w, pref.kappa, g_t, r))
    return Calibration(pref.with_drift(fs), tuple(worsts), tuple(strategies))
