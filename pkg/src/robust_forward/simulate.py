"""Path simulation of asset, wealth and performance, and martingale checks.

All three state variables are driven by one Brownian motion. Under constant
coefficients the log-increments are Gaussian, so stepping is exact.

Normals come from a counter-based generator (Philox). Paths are generated in
fixed blocks of :data:`BLOCK_PATHS`; block ``b`` uses key ``seed`` and
counter ``b``, so the normal for path i and step j depends only on
``(seed, i, j, n_steps)`` and not on how blocks are scheduled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .model import CrraPreference, DomainError, log_drift_rate
from .strategy import optimal_fraction
from .worst_case import WorstCase, constraint_residual

BLOCK_PATHS = 4096
RESIDUAL_TOL = 1e-12
MARTINGALE_TOL = 1e-12


class PreconditionError(DomainError):
    """f is not consistent with the worst case; carries the offending residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 1.0
    n_steps: int = 1
    n_paths: int = 100_000
    seed: int = 0
    x0: float = 1.0
    s0: float = 1.0

    def __post_init__(self) -> None:
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon!r}")
        if self.n_steps < 1 or self.n_paths < 1:
            raise DomainError("n_steps and n_paths must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not (self.x0 > 0 and self.s0 > 0):
            raise DomainError("x0 and s0 must be positive")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True)
class PathBundle:
    time_grid: np.ndarray
    asset: np.ndarray
    wealth: np.ndarray
    log_scale: np.ndarray
    performance: np.ndarray


class Verdict(enum.Enum):
    MARTINGALE = "Martingale"
    SUPERMARTINGALE = "Supermartingale"
    VIOLATED = "Violated"


@dataclass(frozen=True)
class MartingaleReport:
    analytic_exponent: float
    mc_mean_ratio: float
    mc_std_error: float
    verdict: Verdict
    n_paths: int


def _blocks(n_paths: int) -> Iterator[tuple[int, int, int]]:
    for b, start in enumerate(range(0, n_paths, BLOCK_PATHS)):
        yield b, start, min(start + BLOCK_PATHS, n_paths)


def block_normals(seed: int, block: int, rows: int, n_steps: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))
    return gen.standard_normal((rows, n_steps))


def standard_normals(seed: int, n_paths: int, n_steps: int) -> np.ndarray:
    """All normals for a run, shape (n_paths, n_steps)."""
    out = np.empty((n_paths, n_steps))
    for b, start, stop in _blocks(n_paths):
        out[start:stop] = block_normals(seed, b, stop - start, n_steps)
    return out


def _step_coefficients(cfg: SimConfig, pref: CrraPreference) -> tuple[np.ndarray, np.ndarray]:
    if not pref.calibrated:
        raise DomainError("preference has no drift coefficient f; calibrate it first")
    starts = cfg.time_grid()[:-1]
    g = np.array([pref.g_at(t) for t in starts])
    f = np.array([pref.f_at(t) for t in starts])
    return g, f


def _increments(xi, cfg, mu, sigma, r, pi, g, f):
    """Exact log-increments of S, X and log_scale for a block of normals."""
    dt = cfg.dt
    dw = math.sqrt(dt) * xi
    d_log_s = (mu - 0.5 * sigma * sigma) * dt + sigma * dw
    d_log_x = ((mu - r) * pi - 0.5 * pi * pi * sigma * sigma) * dt + pi * sigma * dw
    d_alpha = f * dt + g * sigma * dw
    return d_log_s, d_log_x, d_alpha


def _euler_paths(xi, cfg, mu, sigma, r, pi):
    dt = cfg.dt
    dw = math.sqrt(dt) * xi
    s_fac = 1.0 + mu * dt + sigma * dw
    x_fac = 1.0 + (mu - r) * pi * dt + pi * sigma * dw
    s = cfg.s0 * np.cumprod(s_fac, axis=1)
    x = cfg.x0 * np.cumprod(x_fac, axis=1)
    if np.any(x <= 0) or np.any(s <= 0):
        raise DomainError("Euler step produced non-positive wealth or price; use more steps")
    return s, x


def simulate_paths(
    cfg: SimConfig,
    mu: float,
    sigma: float,
    r: float,
    pi: float,
    pref: CrraPreference,
    euler: bool = False,
) -> PathBundle:
    """Simulate full paths; arrays have shape (n_paths, n_steps + 1) including t=0."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    g, f = _step_coefficients(cfg, pref)
    xi = standard_normals(cfg.seed, cfg.n_paths, cfg.n_steps)
    d_log_s, d_log_x, d_alpha = _increments(xi, cfg, mu, sigma, r, pi, g, f)

    zeros = np.zeros((cfg.n_paths, 1))
    alpha = np.hstack([zeros, np.cumsum(d_alpha, axis=1)])
    if euler:
        s, x = _euler_paths(xi, cfg, mu, sigma, r, pi)
        asset = np.hstack([np.full((cfg.n_paths, 1), cfg.s0), s])
        wealth = np.hstack([np.full((cfg.n_paths, 1), cfg.x0), x])
    else:
        asset = cfg.s0 * np.exp(np.hstack([zeros, np.cumsum(d_log_s, axis=1)]))
        wealth = cfg.x0 * np.exp(np.hstack([zeros, np.cumsum(d_log_x, axis=1)]))
    performance = np.exp(alpha) * wealth**pref.kappa / pref.kappa
    return PathBundle(cfg.time_grid(), asset, wealth, alpha, performance)


def terminal_ratios(
    cfg: SimConfig,
    mu: float,
    sigma: float,
    r: float,
    pi: float,
    pref: CrraPreference,
    euler: bool = False,
) -> np.ndarray:
    """U(horizon, X_horizon) / U(0, x0) per path, generated block by block."""
    g, f = _step_coefficients(cfg, pref)
    out = np.empty(cfg.n_paths)
    for b, start, stop in _blocks(cfg.n_paths):
        xi = block_normals(cfg.seed, b, stop - start, cfg.n_steps)
        _, d_log_x, d_alpha = _increments(xi, cfg, mu, sigma, r, pi, g, f)
        alpha = d_alpha.sum(axis=1)
        if euler:
            _, x = _euler_paths(xi, cfg, mu, sigma, r, pi)
            log_x = np.log(x[:, -1] / cfg.x0)
        else:
            log_x = d_log_x.sum(axis=1)
        out[start:stop] = np.exp(alpha + pref.kappa * log_x)
    return out


def analytic_performance_exponent(
    pi: float,
    mu: float,
    sigma_sq: float,
    r: float,
    kappa: float,
    g_t: float,
    f_t: float,
) -> float:
    """Growth rate of E[U(t+h, X_{t+h})] from the lognormal moment formula.

    log U has drift f + kappa((mu-r) pi - pi^2 sigma^2 / 2) and variance rate
    (g + kappa pi)^2 sigma^2; the mean grows at drift + variance / 2.
    """
    log_drift = f_t + kappa * ((mu - r) * pi - 0.5 * pi * pi * sigma_sq)
    log_var = (g_t + kappa * pi) ** 2 * sigma_sq
    lam = log_drift + 0.5 * log_var
    direct = log_drift_rate(pi, mu, sigma_sq, r, kappa, g_t, f_t)
    if abs(lam - direct) > 1e-12 * max(1.0, abs(lam)):
        raise ArithmeticError(f"moment exponent {lam!r} disagrees with drift rate {direct!r}")
    return lam


def martingale_test(
    cfg: SimConfig,
    pi: float,
    worst: WorstCase,
    pref: CrraPreference,
    r: float,
    scenario: Optional[tuple[float, float]] = None,
    euler: bool = False,
) -> MartingaleReport:
    """Check the (super)martingale property of U(t, X_t^pi) by simulation.

    Paths are simulated under ``worst`` unless ``scenario = (mu, sigma^2)``
    names another belief. The preference must be calibrated against
    ``worst`` and constant over the horizon.
    """
    if not pref.calibrated:
        raise DomainError("preference has no drift coefficient f; calibrate it first")
    k = pref.segment(0.0)
    if pref.segment_end(k) < cfg.horizon:
        raise DomainError("martingale_test needs a single g segment over the horizon")
    g_t, f_t = pref.g[k], pref.f[k]
    pi_opt = optimal_fraction(worst, pref.kappa, g_t, r).pi_star
    residual = constraint_residual(worst, pi_opt, pref.kappa, g_t, f_t, r)
    if abs(residual) > RESIDUAL_TOL:
        raise PreconditionError(
            f"f is inconsistent with the worst case: residual {residual:.3e}", residual
        )

    mu, sigma_sq = scenario if scenario is not None else (worst.mu_star, worst.sigma_sq_star)
    lam = analytic_performance_exponent(pi, mu, sigma_sq, r, pref.kappa, g_t, f_t)
    ratios = terminal_ratios(cfg, mu, math.sqrt(sigma_sq), r, pi, pref, euler=euler)
    mean = float(np.mean(ratios))
    se = float(np.std(ratios, ddof=1) / math.sqrt(cfg.n_paths)) if cfg.n_paths > 1 else math.inf

    if abs(lam) < MARTINGALE_TOL and abs(mean - 1.0) <= 3.0 * se:
        verdict = Verdict.MARTINGALE
    elif lam < 0 and mean <= 1.0 + 3.0 * se:
        verdict = Verdict.SUPERMARTINGALE
    else:
        verdict = Verdict.VIOLATED
    return MartingaleReport(
        analytic_exponent=lam * cfg.horizon,
        mc_mean_ratio=mean,
        mc_std_error=se,
        verdict=verdict,
        n_paths=cfg.n_paths,
    )
