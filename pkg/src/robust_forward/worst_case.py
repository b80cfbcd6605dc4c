"""Worst-case beliefs over compact ambiguity sets.

For CRRA preferences the drift of U(t, X_t) per unit of U is affine in
(mu, sigma^2) and strictly concave in the fraction pi. Maximizing over pi
for a fixed belief gives

    V(mu, s) = g^2 s / 2 + kappa (mu - r + g s)^2 / (2 (1 - kappa) s),

and the worst-case belief is the minimizer of V over the ambiguity set.
The closed-form selectors below solve that minimization per ambiguity
shape; :func:`grid_minimax_oracle` does it by brute force.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .model import (
    AmbiguitySpec,
    DomainError,
    MeanReturnInterval,
    NoAmbiguity,
    Premiums,
    Rectangle,
    Structured,
    VolatilityInterval,
    _check_kappa,
    log_drift_rate,
    premiums,
)

FEASIBILITY_TOL = 1e-12


class Branch(enum.Enum):
    LOWER = "LowerBound"
    INTERIOR = "Interior"
    UPPER = "UpperBound"


class Mode(enum.Enum):
    NO_AMBIGUITY = "none"
    MEAN_RETURN = "mean_return"
    VOLATILITY = "volatility"
    STRUCTURED = "structured"
    RECTANGLE = "rectangle"


def mode_of(spec) -> Mode:
    for cls, mode in (
        (NoAmbiguity, Mode.NO_AMBIGUITY),
        (MeanReturnInterval, Mode.MEAN_RETURN),
        (VolatilityInterval, Mode.VOLATILITY),
        (Structured, Mode.STRUCTURED),
        (Rectangle, Mode.RECTANGLE),
    ):
        if isinstance(spec, cls):
            return mode
    raise TypeError(f"not an ambiguity spec: {spec!r}")


@dataclass(frozen=True)
class WorstCase:
    """Selected belief (mu*, sigma*^2) and where it sits in its interval.

    For a rectangle ``branch`` describes the position of sigma*^2.
    ``degenerate`` marks a tie-broken choice among equally bad beliefs.
    """

    mu_star: float
    sigma_sq_star: float
    branch: Branch
    premiums_at_star: Premiums
    mode: Mode
    r: float
    z_star: Optional[float] = None
    degenerate: bool = False

    @property
    def excess_return(self) -> float:
        return self.mu_star - self.r

    @property
    def sigma_star(self) -> float:
        return math.sqrt(self.sigma_sq_star)


@dataclass(frozen=True)
class StructuredCoefficients:
    a: float
    b: float
    c: float


def _make(mu, sigma_sq, branch, g_t, r, mode, z=None, degenerate=False) -> WorstCase:
    return WorstCase(
        mu_star=float(mu),
        sigma_sq_star=float(sigma_sq),
        branch=branch,
        premiums_at_star=premiums(mu, math.sqrt(sigma_sq), r, g_t),
        mode=mode,
        r=r,
        z_star=None if z is None else float(z),
        degenerate=degenerate,
    )


def best_response(mu, sigma_sq, r: float, kappa: float, g_t: float):
    """Fraction maximizing the performance drift under a fixed belief."""
    return (g_t * sigma_sq + (mu - r)) / ((1.0 - kappa) * sigma_sq)


def optimal_drift_excess(mu, sigma_sq, r: float, kappa: float, g_t: float):
    """V(mu, sigma^2): the drift at the best response, net of f. Vectorized."""
    excess = mu - r
    return 0.5 * g_t * g_t * sigma_sq + kappa * (excess + g_t * sigma_sq) ** 2 / (
        2.0 * (1.0 - kappa) * sigma_sq
    )


# ---------------------------------------------------------------------------
# Closed-form selectors
# ---------------------------------------------------------------------------


def worst_case_mean_return(spec: MeanReturnInterval, g_t: float, r: float) -> WorstCase:
    """Worst-case mean return with known volatility.

    The belief that makes the total premium vanish, mu = r - g sigma^2, is
    chosen when it is admissible; otherwise the nearer bound.
    """
    # the total premium has the sign of mu - (r - g sigma^2); comparing in mu
    # keeps boundary equality exact instead of at the mercy of the division
    mu_star = r - g_t * spec.sigma * spec.sigma
    if spec.mu_hi < mu_star:
        return _make(spec.mu_hi, spec.sigma_sq, Branch.UPPER, g_t, r, Mode.MEAN_RETURN)
    if spec.mu_lo > mu_star:
        return _make(spec.mu_lo, spec.sigma_sq, Branch.LOWER, g_t, r, Mode.MEAN_RETURN)
    return _make(mu_star, spec.sigma_sq, Branch.INTERIOR, g_t, r, Mode.MEAN_RETURN)


def worst_case_volatility(spec: VolatilityInterval, g_t: float, kappa: float, r: float) -> WorstCase:
    """Worst-case squared volatility with known mean, minimizing g^2 s + kappa (mu-r)^2 / s."""
    _check_kappa(kappa)
    excess = spec.mu - r
    lo, hi = spec.sigma_sq_lo, spec.sigma_sq_hi
    if excess == 0 and g_t == 0:
        return _make(spec.mu, hi, Branch.UPPER, g_t, r, Mode.VOLATILITY, degenerate=True)
    g_sq = g_t * g_t
    target = kappa * excess * excess
    if g_sq * lo * lo >= target:
        return _make(spec.mu, lo, Branch.LOWER, g_t, r, Mode.VOLATILITY)
    if g_sq * hi * hi <= target:
        return _make(spec.mu, hi, Branch.UPPER, g_t, r, Mode.VOLATILITY)
    s = abs(excess) * math.sqrt(kappa) / abs(g_t)
    s = min(max(s, lo), hi)
    return _make(spec.mu, s, Branch.INTERIOR, g_t, r, Mode.VOLATILITY)


def structured_coefficients(
    spec: Structured, kappa: float, g_t: float, paper_a: bool = False
) -> StructuredCoefficients:
    """Coefficients of  a z + b / (2 (sigma0^2 + coupling z)) + c.

    ``paper_a`` substitutes the linear coefficient as originally published,
    kappa g + g^2 sigma0^2 / 2 + kappa / (2 coupling), which does not match the
    expansion; it exists only for comparison.
    """
    _check_kappa(kappa)
    alpha = spec.coupling
    if alpha == 0:
        raise DomainError("coupling is zero; the set reduces to a mean-return interval")
    s0, m0 = spec.sigma0_sq, spec.mu0
    if paper_a:
        a = kappa * g_t + 0.5 * g_t * g_t * s0 + kappa / (2.0 * alpha)
    else:
        a = kappa * g_t + 0.5 * alpha * g_t * g_t + kappa / (2.0 * alpha)
    b = kappa * (m0 - s0 / alpha) ** 2
    c = (
        kappa * m0 * g_t
        + 0.5 * s0 * g_t * g_t
        + kappa * s0 / (2.0 * alpha * alpha)
        + kappa * (alpha * m0 - s0) / (alpha * alpha)
    )
    return StructuredCoefficients(a=a, b=b, c=c)


def structured_objective(z, spec: Structured, kappa: float, coeffs: StructuredCoefficients):
    """Return ``(f_hat(z), f_hat''(z))`` for scalar or array ``z``."""
    s = spec.sigma0_sq + spec.coupling * np.asarray(z, dtype=float)
    value = (coeffs.a * z + coeffs.b / (2.0 * s) + coeffs.c) / (kappa - 1.0)
    curvature = spec.coupling**2 * coeffs.b / ((kappa - 1.0) * s**3)
    return value, curvature


def worst_case_structured(
    spec: Structured, kappa: float, g_t: float, r: float, paper_a: bool = False
) -> WorstCase:
    """Maximize the concave f_hat over [z_lo, z_hi]."""
    _check_kappa(kappa)
    if spec.coupling == 0:
        sigma = math.sqrt(spec.sigma0_sq)
        inner = worst_case_mean_return(
            MeanReturnInterval(r + spec.mu0 + spec.z_lo, r + spec.mu0 + spec.z_hi, sigma), g_t, r
        )
        z = inner.mu_star - r - spec.mu0
        return _make(inner.mu_star, spec.sigma0_sq, inner.branch, g_t, r, Mode.STRUCTURED, z=z)

    coeffs = structured_coefficients(spec, kappa, g_t, paper_a=paper_a)
    alpha = spec.coupling
    z_lo, z_hi = spec.z_lo, spec.z_hi

    z_star = None
    branch = None
    if coeffs.b > 0 and coeffs.a != 0:
        ratio = alpha * coeffs.b / (2.0 * coeffs.a)
        if ratio > 0:
            # only the root with positive variance is admissible
            z_tilde = (math.sqrt(ratio) - spec.sigma0_sq) / alpha
            if z_lo <= z_tilde <= z_hi:
                z_star, branch = z_tilde, Branch.INTERIOR
    if z_star is None:
        if coeffs.b == 0:
            slope = coeffs.a / (kappa - 1.0)
            use_hi = slope > 0
        else:
            v_lo = float(structured_objective(z_lo, spec, kappa, coeffs)[0])
            v_hi = float(structured_objective(z_hi, spec, kappa, coeffs)[0])
            use_hi = v_hi > v_lo
        z_star, branch = (z_hi, Branch.UPPER) if use_hi else (z_lo, Branch.LOWER)

    return _make(
        r + spec.excess_return(z_star),
        spec.variance(z_star),
        branch,
        g_t,
        r,
        Mode.STRUCTURED,
        z=z_star,
    )


def worst_case_rectangle(spec: Rectangle, g_t: float, kappa: float, r: float) -> WorstCase:
    """Minimize V over a product of intervals.

    For fixed s the best mean is the clip of r - g s to [mu_lo, mu_hi]. This
    splits [s_lo, s_hi] into pieces where either the mean is pinned to a bound
    (V reduces to the volatility problem) or V = g^2 s / 2; each piece is
    minimized exactly and the best piece wins.
    """
    _check_kappa(kappa)
    m_lo, m_hi = spec.mu_lo - r, spec.mu_hi - r
    s_lo, s_hi = spec.sigma_sq_lo, spec.sigma_sq_hi

    cuts = {s_lo, s_hi}
    if g_t != 0:
        for m in (m_lo, m_hi):
            s = -m / g_t
            if s_lo < s < s_hi:
                cuts.add(s)
    pts = sorted(cuts)
    pieces = list(zip(pts[:-1], pts[1:])) or [(s_lo, s_hi)]

    def best_mean(s: float) -> float:
        return min(max(-g_t * s, m_lo), m_hi)

    candidates = []
    for a, b in pieces:
        mid = 0.5 * (a + b)
        m = best_mean(mid)
        if m_lo < -g_t * mid < m_hi:
            s = a  # V = g^2 s / 2 is nondecreasing
        elif g_t == 0:
            s = b
        else:
            s = min(max(abs(m) * math.sqrt(kappa) / abs(g_t), a), b)
        m = best_mean(s)
        candidates.append((float(optimal_drift_excess(m + r, s, r, kappa, g_t)), s, m))

    value, s_star, m_star = min(candidates, key=lambda c: (c[0], c[1]))
    if s_star == s_lo:
        branch = Branch.LOWER
    elif s_star == s_hi:
        branch = Branch.UPPER
    else:
        branch = Branch.INTERIOR
    degenerate = g_t == 0 and m_lo <= 0 <= m_hi
    return _make(r + m_star, s_star, branch, g_t, r, Mode.RECTANGLE, degenerate=degenerate)


def no_ambiguity(spec: NoAmbiguity, g_t: float, r: float) -> WorstCase:
    return _make(spec.mu, spec.sigma_sq, Branch.INTERIOR, g_t, r, Mode.NO_AMBIGUITY)


def select_worst_case(spec: AmbiguitySpec, kappa: float, g_t: float, r: float, paper_a: bool = False) -> WorstCase:
    """Dispatch to the closed-form selector matching ``spec``."""
    mode = mode_of(spec)
    if mode is Mode.MEAN_RETURN:
        return worst_case_mean_return(spec, g_t, r)
    if mode is Mode.VOLATILITY:
        return worst_case_volatility(spec, g_t, kappa, r)
    if mode is Mode.STRUCTURED:
        return worst_case_structured(spec, kappa, g_t, r, paper_a=paper_a)
    if mode is Mode.RECTANGLE:
        return worst_case_rectangle(spec, g_t, kappa, r)
    return no_ambiguity(spec, g_t, r)


def contains(spec: AmbiguitySpec, mu: float, sigma_sq: float, r: float, tol: float = FEASIBILITY_TOL) -> bool:
    """Membership test for (mu, sigma^2) in the ambiguity set, with slack ``tol``."""
    mode = mode_of(spec)
    if mode is Mode.MEAN_RETURN:
        return (
            spec.mu_lo - tol <= mu <= spec.mu_hi + tol
            and abs(sigma_sq - spec.sigma_sq) <= tol
        )
    if mode is Mode.VOLATILITY:
        return abs(mu - spec.mu) <= tol and spec.sigma_sq_lo - tol <= sigma_sq <= spec.sigma_sq_hi + tol
    if mode is Mode.RECTANGLE:
        return (
            spec.mu_lo - tol <= mu <= spec.mu_hi + tol
            and spec.sigma_sq_lo - tol <= sigma_sq <= spec.sigma_sq_hi + tol
        )
    if mode is Mode.STRUCTURED:
        z = mu - r - spec.mu0
        return spec.z_lo - tol <= z <= spec.z_hi + tol and abs(spec.variance(z) - sigma_sq) <= tol
    return abs(mu - spec.mu) <= tol and abs(sigma_sq - spec.sigma_sq) <= tol


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaGrid:
    """Inclusive grid over an ambiguity set.

    ``mu`` and ``sigma_sq`` broadcast against each other: for a rectangle they
    are a column and a row, otherwise two aligned 1-D arrays. ``z`` is set for
    the structured set.
    """

    mu: np.ndarray
    sigma_sq: np.ndarray
    z: Optional[np.ndarray]
    steps: dict

    @property
    def separable(self) -> bool:
        return self.mu.ndim == 2


def theta_grid(spec: AmbiguitySpec, r: float, n: int) -> ThetaGrid:
    if n < 2:
        raise DomainError(f"theta grid needs at least 2 points per axis, got {n}")
    mode = mode_of(spec)

    def axis(lo, hi):
        return np.linspace(lo, hi, n), (hi - lo) / (n - 1)

    if mode is Mode.MEAN_RETURN:
        mu, h = axis(spec.mu_lo, spec.mu_hi)
        return ThetaGrid(mu, np.full(n, spec.sigma_sq), None, {"mu": h})
    if mode is Mode.VOLATILITY:
        s, h = axis(spec.sigma_sq_lo, spec.sigma_sq_hi)
        return ThetaGrid(np.full(n, float(spec.mu)), s, None, {"sigma_sq": h})
    if mode is Mode.STRUCTURED:
        z, h = axis(spec.z_lo, spec.z_hi)
        return ThetaGrid(
            r + spec.mu0 + z,
            spec.sigma0_sq + spec.coupling * z,
            z,
            {"z": h, "mu": h, "sigma_sq": abs(spec.coupling) * h},
        )
    if mode is Mode.RECTANGLE:
        mu, hm = axis(spec.mu_lo, spec.mu_hi)
        s, hs = axis(spec.sigma_sq_lo, spec.sigma_sq_hi)
        return ThetaGrid(mu[:, None], s[None, :], None, {"mu": hm, "sigma_sq": hs})
    raise DomainError("a single-point set has no grid")


def grid_inner_inf(grid: ThetaGrid, pi: float, r: float, kappa: float, g_t: float, f_t: float):
    """min over the grid of the drift at fraction ``pi``; returns (value, flat index)."""
    # drift = f + kappa (mu-r) pi + sigma^2 (g^2/2 + kappa g pi + kappa (kappa-1) pi^2 / 2)
    mu_coef = kappa * pi
    s_coef = 0.5 * g_t * g_t + kappa * g_t * pi + 0.5 * kappa * (kappa - 1.0) * pi * pi
    if grid.separable:
        mu_terms = mu_coef * (grid.mu[:, 0] - r)
        s_terms = s_coef * grid.sigma_sq[0, :]
        i, j = int(np.argmin(mu_terms)), int(np.argmin(s_terms))
        return f_t + mu_terms[i] + s_terms[j], i * grid.sigma_sq.shape[1] + j
    vals = mu_coef * (grid.mu - r) + s_coef * grid.sigma_sq
    k = int(np.argmin(vals))
    return f_t + vals[k], k


@dataclass(frozen=True)
class OracleResult:
    """Grid saddle point.

    ``inf_sup`` minimizes the best-response drift over grid beliefs;
    ``sup_inf`` maximizes the worst grid drift over pi. Their gap exposes a
    failed saddle. ``value`` is ``inf_sup``.
    """

    pi_star: float
    worst: WorstCase
    value: float
    sup_inf: float
    inf_sup: float
    steps: dict
    pi_bracket: tuple[float, float]


def grid_minimax_oracle(
    spec: AmbiguitySpec,
    kappa: float,
    g_t: float,
    r: float,
    theta_resolution: int = 2000,
    pi_bracket: Optional[tuple[float, float]] = None,
    f_t: float = 0.0,
) -> OracleResult:
    """Brute-force saddle of the performance drift over a gridded ambiguity set."""
    _check_kappa(kappa)
    grid = theta_grid(spec, r, theta_resolution)
    mu, s = np.broadcast_arrays(grid.mu, grid.sigma_sq)

    values = f_t + optimal_drift_excess(mu, s, r, kappa, g_t)
    k = int(np.argmin(values))
    idx = np.unravel_index(k, values.shape)
    inf_sup = float(values[idx])
    mu_w, s_w = float(mu[idx]), float(s[idx])

    # branch from grid position along the reported axis
    if grid.separable:
        pos, last = idx[1], values.shape[1] - 1
    else:
        pos, last = idx[0], values.shape[0] - 1
    branch = Branch.LOWER if pos == 0 else Branch.UPPER if pos == last else Branch.INTERIOR
    z_w = None if grid.z is None else float(grid.z[idx[0]])
    worst = _make(mu_w, s_w, branch, g_t, r, mode_of(spec), z=z_w)

    if pi_bracket is None:
        responses = best_response(mu, s, r, kappa, g_t)
        lo, hi = float(responses.min()), float(responses.max())
        pad = 0.1 * (hi - lo) + 1e-3 * (1.0 + abs(lo) + abs(hi))
        pi_bracket = (lo - pad, hi + pad)

    res = minimize_scalar(
        lambda p: -grid_inner_inf(grid, p, r, kappa, g_t, f_t)[0],
        bounds=pi_bracket,
        method="bounded",
        options={"xatol": 1e-12, "maxiter": 2000},
    )
    pi_star = float(res.x)
    sup_inf = float(grid_inner_inf(grid, pi_star, r, kappa, g_t, f_t)[0])
    return OracleResult(
        pi_star=pi_star,
        worst=worst,
        value=inf_sup,
        sup_inf=sup_inf,
        inf_sup=inf_sup,
        steps=dict(grid.steps),
        pi_bracket=(float(pi_bracket[0]), float(pi_bracket[1])),
    )


# ---------------------------------------------------------------------------
# Characteristic constraint
# ---------------------------------------------------------------------------


def constraint_residual(
    worst: WorstCase, pi_star: float, kappa: float, g_t: float, f_t: float, r: float
) -> float:
    """CRRA form of the characteristic constraint at a solved (belief, fraction) pair.

    Zero exactly when f is consistent with the worst case; affine in ``f_t``.
    """
    return log_drift_rate(pi_star, worst.mu_star, worst.sigma_sq_star, r, kappa, g_t, f_t)


def characteristic_constraint(
    beta: float,
    delta: float,
    gamma: float,
    eta_x: float,
    u_x: float,
    u_xx: float,
    mu,
    sigma_sq,
    r: float,
):
    """Pointwise value of the general characteristic constraint at beliefs (mu, sigma^2).

    Works for any performance field given its local characteristics at one
    (t, x); a robust forward performance has minimum zero over the ambiguity
    set. Vectorized over ``mu`` and ``sigma_sq``.
    """
    if not u_xx < 0:
        raise DomainError("U_xx must be negative (strict concavity)")
    excess = np.asarray(mu, dtype=float) - r
    s = np.asarray(sigma_sq, dtype=float)
    return (
        beta
        + delta * np.asarray(mu, dtype=float)
        + (gamma - eta_x * eta_x / (2.0 * u_xx)) * s
        - excess * excess * u_x * u_x / (2.0 * u_xx * s)
        - excess * u_x * eta_x / u_xx
    )


def characteristic_residual(beta, delta, gamma, eta_x, u_x, u_xx, spec, r: float, n: int = 500) -> float:
    """Minimum of :func:`characteristic_constraint` over a grid of ``spec``."""
    grid = theta_grid(spec, r, n)
    return float(np.min(characteristic_constraint(beta, delta, gamma, eta_x, u_x, u_xx, grid.mu, grid.sigma_sq, r)))
