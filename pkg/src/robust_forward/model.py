"""Domain types and pointwise quantities for CRRA-type robust forward performance.

The performance process is

    U(t, x) = exp(log_scale(t)) / kappa * x**kappa,
    d log_scale = f(t) dt + g(t) sigma_t dW_t,   log_scale(0) = 0,

so every drift computed here is homogeneous in wealth and can be reported
per unit of U.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a model quantity."""


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa!r}")


# ---------------------------------------------------------------------------
# Market and ambiguity sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarketParams:
    risk_free_rate: float = 0.0
    spot_price: float = 1.0
    initial_wealth: float = 1.0

    def __post_init__(self) -> None:
        if not self.spot_price > 0:
            raise DomainError(f"spot_price must be positive, got {self.spot_price!r}")
        if not self.initial_wealth > 0:
            raise DomainError(f"initial_wealth must be positive, got {self.initial_wealth!r}")


@dataclass(frozen=True)
class MeanReturnInterval:
    """Mean return known only to lie in [mu_lo, mu_hi]; volatility fixed."""

    mu_lo: float
    mu_hi: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.mu_lo <= self.mu_hi:
            raise DomainError(f"mu_lo={self.mu_lo} exceeds mu_hi={self.mu_hi}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def sigma_sq(self) -> float:
        return self.sigma * self.sigma


@dataclass(frozen=True)
class VolatilityInterval:
    """Squared volatility known only to lie in [sigma_sq_lo, sigma_sq_hi]; mean fixed."""

    sigma_sq_lo: float
    sigma_sq_hi: float
    mu: float

    def __post_init__(self) -> None:
        if not 0 < self.sigma_sq_lo <= self.sigma_sq_hi:
            raise DomainError(
                f"need 0 < sigma_sq_lo <= sigma_sq_hi, got {self.sigma_sq_lo}, {self.sigma_sq_hi}"
            )


@dataclass(frozen=True)
class Structured:
    """Coupled ambiguity: mu - r = mu0 + z and sigma^2 = sigma0_sq + coupling * z."""

    mu0: float
    sigma0_sq: float
    coupling: float
    z_lo: float
    z_hi: float

    def __post_init__(self) -> None:
        if not self.sigma0_sq > 0:
            raise DomainError(f"sigma0_sq must be positive, got {self.sigma0_sq!r}")
        if not self.z_lo <= self.z_hi:
            raise DomainError(f"z_lo={self.z_lo} exceeds z_hi={self.z_hi}")
        # variance is affine in z, so checking both endpoints covers the interval
        for z in (self.z_lo, self.z_hi):
            if not self.variance(z) > 0:
                raise DomainError(
                    f"sigma0_sq + coupling*z must stay positive on [z_lo, z_hi]; fails at z={z}"
                )

    def variance(self, z: float) -> float:
        return self.sigma0_sq + self.coupling * z

    def excess_return(self, z: float) -> float:
        return self.mu0 + z


@dataclass(frozen=True)
class Rectangle:
    """Independent intervals for the mean and the squared volatility."""

    mu_lo: float
    mu_hi: float
    sigma_sq_lo: float
    sigma_sq_hi: float

    def __post_init__(self) -> None:
        if not self.mu_lo <= self.mu_hi:
            raise DomainError(f"mu_lo={self.mu_lo} exceeds mu_hi={self.mu_hi}")
        if not 0 < self.sigma_sq_lo <= self.sigma_sq_hi:
            raise DomainError(
                f"need 0 < sigma_sq_lo <= sigma_sq_hi, got {self.sigma_sq_lo}, {self.sigma_sq_hi}"
            )


@dataclass(frozen=True)
class NoAmbiguity:
    """A single known (mu, sigma^2); the degenerate ambiguity set."""

    mu: float
    sigma_sq: float

    def __post_init__(self) -> None:
        if not self.sigma_sq > 0:
            raise DomainError(f"sigma_sq must be positive, got {self.sigma_sq!r}")


AmbiguitySpec = Union[NoAmbiguity, MeanReturnInterval, VolatilityInterval, Structured, Rectangle]


# ---------------------------------------------------------------------------
# Preference
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrraPreference:
    """CRRA forward performance with piecewise-constant coefficients.

    ``breaks[k]`` is the start time of segment k; the first break is 0 and the
    last segment extends to infinity. ``f`` is None until filled in by
    :func:`robust_forward.strategy.calibrate`.
    """

    kappa: float
    breaks: tuple[float, ...] = (0.0,)
    g: tuple[float, ...] = (0.0,)
    f: Optional[tuple[float, ...]] = None
    log_scale_init: float = field(default=0.0, init=False)

    def __post_init__(self) -> None:
        _check_kappa(self.kappa)
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "g", tuple(float(v) for v in self.g))
        if len(self.breaks) != len(self.g) or not self.breaks:
            raise DomainError("breaks and g must be non-empty and of equal length")
        if self.breaks[0] != 0.0:
            raise DomainError("first segment must start at t=0")
        if any(b1 <= b0 for b0, b1 in zip(self.breaks, self.breaks[1:])):
            raise DomainError("segment breaks must be strictly increasing")
        if self.f is not None:
            object.__setattr__(self, "f", tuple(float(v) for v in self.f))
            if len(self.f) != len(self.g):
                raise DomainError("f must have one value per segment")

    @classmethod
    def constant(cls, kappa: float, g: float) -> "CrraPreference":
        return cls(kappa=kappa, breaks=(0.0,), g=(g,))

    @property
    def n_segments(self) -> int:
        return len(self.g)

    @property
    def calibrated(self) -> bool:
        return self.f is not None

    def segment(self, t: float) -> int:
        return max(bisect.bisect_right(self.breaks, t) - 1, 0)

    def g_at(self, t: float) -> float:
        return self.g[self.segment(t)]

    def f_at(self, t: float) -> float:
        if self.f is None:
            raise DomainError("drift coefficient f has not been populated")
        return self.f[self.segment(t)]

    def segment_end(self, k: int) -> float:
        return self.breaks[k + 1] if k + 1 < len(self.breaks) else math.inf

    def with_drift(self, f: Sequence[float]) -> "CrraPreference":
        return replace(self, f=tuple(f))


# ---------------------------------------------------------------------------
# Premiums and characteristics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Premiums:
    market: float
    utility: float
    total: float
    relative: Optional[float]

    @property
    def relative_defined(self) -> bool:
        return self.relative is not None


@dataclass(frozen=True)
class Characteristics:
    beta: float
    delta: float
    gamma: float
    eta: float


def crra_utility(x: float, log_scale: float, kappa: float) -> tuple[float, float, float]:
    """Return ``(U, U_x, U_xx)`` for ``U = exp(log_scale) x**kappa / kappa``."""
    _check_kappa(kappa)
    if not x > 0:
        raise DomainError(f"wealth must be positive, got {x!r}")
    scale = math.exp(log_scale)
    u_x = scale * x ** (kappa - 1.0)
    return u_x * x / kappa, u_x, (kappa - 1.0) * u_x / x


def risk_tolerance(x: float, kappa: float) -> float:
    """Local risk tolerance -U_x/U_xx, which for CRRA is x/(1-kappa)."""
    _check_kappa(kappa)
    if not x > 0:
        raise DomainError(f"wealth must be positive, got {x!r}")
    return x / (1.0 - kappa)


def premiums(mu: float, sigma: float, r: float, g_t: float) -> Premiums:
    """Market, utility and total risk premium at volatility ``sigma``.

    ``relative`` is the ratio of utility to market premium, g sigma^2/(mu - r);
    it is None when mu == r.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    excess = mu - r
    market = excess / sigma
    utility = g_t * sigma
    relative = None if excess == 0 else g_t * sigma * sigma / excess
    return Premiums(market=market, utility=utility, total=market + utility, relative=relative)


def crra_characteristics(x: float, log_scale: float, kappa: float, g_t: float, f_t: float) -> Characteristics:
    u, _, _ = crra_utility(x, log_scale, kappa)
    return Characteristics(beta=u * f_t, delta=0.0, gamma=0.5 * u * g_t * g_t, eta=u * g_t)


def log_drift_rate(
    pi: float,
    mu: float,
    sigma_sq: float,
    r: float,
    kappa: float,
    g_t: float,
    f_t: float,
) -> float:
    """Drift of U(t, X_t) per unit of U when holding fraction ``pi`` in the risky asset.

    Strictly concave in ``pi`` and affine in ``(mu, sigma_sq)``. Accepts
    arrays for ``mu`` and ``sigma_sq``.
    """
    _check_kappa(kappa)
    if not np.all(np.asarray(sigma_sq) > 0):
        raise DomainError(f"sigma_sq must be positive, got {sigma_sq!r}")
    excess = mu - r
    return (
        f_t
        + 0.5 * g_t * g_t * sigma_sq
        + kappa * excess * pi
        + kappa * g_t * pi * sigma_sq
        + 0.5 * kappa * (kappa - 1.0) * pi * pi * sigma_sq
    )
