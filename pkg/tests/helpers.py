"""Independent oracles and random scenario draws shared by the test modules.

Nothing here calls the closed-form selectors; the oracles minimize the
best-response drift by dense enumeration.

Documented draw ranges (all uniform):

    kappa in [0.1, 0.8], g in [-0.5, 0.5], r in [0, 0.05]
    mean_return: sigma in [0.1, 0.5], mu_lo - r in [-0.15, 0.1], width in [0.005, 0.1]
    volatility:  sigma_sq_lo in [0.01, 0.2], width in [0.005, 0.3], mu - r in [-0.15, 0.15]
    structured:  mu0 in [-0.05, 0.1], sigma0_sq in [0.05, 0.2], |coupling| in [0.05, 1],
                 z_lo in [-0.15, 0.1], width in [0.01, 0.2], variance >= 0.01 on [z_lo, z_hi]
    rectangle:   mu_lo - r in [-0.15, 0.1], width in [0.005, 0.1],
                 sigma_sq_lo in [0.01, 0.2], width in [0.005, 0.3]
"""

from __future__ import annotations

import numpy as np

from robust_forward.model import MeanReturnInterval, Rectangle, Structured, VolatilityInterval

PAPER_KAPPA, PAPER_MU0, PAPER_SIGMA0_SQ, PAPER_G = 0.4, 0.02, 0.1, 0.1

# z_lo, z_hi, coupling
TABLE_ROWS = (
    (-0.15, -0.08, 0.5),
    (-0.08, 0.07, 0.5),
    (0.02, 0.12, 0.5),
    (-0.15, -0.08, -0.5),
    (-0.08, 0.07, -0.5),
    (0.02, 0.12, -0.5),
)


def table_spec(row: int) -> Structured:
    z_lo, z_hi, coupling = TABLE_ROWS[row - 1]
    return Structured(PAPER_MU0, PAPER_SIGMA0_SQ, coupling, z_lo, z_hi)


def drift_sup(excess, sigma_sq, kappa, g):
    """sup over pi of the drift net of f, by completing the square."""
    # kappa (m + g s) pi - kappa (1-kappa) s pi^2 / 2 is maximal at pi = (m + g s)/((1-kappa) s)
    pi = (excess + g * sigma_sq) / ((1 - kappa) * sigma_sq)
    return (
        0.5 * g * g * sigma_sq
        + kappa * excess * pi
        + kappa * g * pi * sigma_sq
        + 0.5 * kappa * (kappa - 1) * pi * pi * sigma_sq
    )


def dense_argmin(fn, lo, hi, n=400_001):
    """Argmin of ``fn`` on a dense grid, refined once on a local grid."""
    x = np.linspace(lo, hi, n)
    i = int(np.argmin(fn(x)))
    a, b = x[max(i - 1, 0)], x[min(i + 1, n - 1)]
    x2 = np.linspace(a, b, 20_001)
    j = int(np.argmin(fn(x2)))
    return float(x2[j])


def brute_structured(spec: Structured, kappa, g):
    """z minimizing the best-response drift along the coupled segment."""
    return dense_argmin(
        lambda z: drift_sup(spec.mu0 + z, spec.sigma0_sq + spec.coupling * z, kappa, g),
        spec.z_lo,
        spec.z_hi,
    )


def brute_volatility(spec: VolatilityInterval, kappa, g, r):
    return dense_argmin(
        lambda s: drift_sup(spec.mu - r, s, kappa, g), spec.sigma_sq_lo, spec.sigma_sq_hi
    )


def brute_mean(spec: MeanReturnInterval, kappa, g, r):
    return dense_argmin(lambda mu: drift_sup(mu - r, spec.sigma_sq, kappa, g), spec.mu_lo, spec.mu_hi)


def draw_common(rng):
    return rng.uniform(0.1, 0.8), rng.uniform(-0.5, 0.5), rng.uniform(0.0, 0.05)


def draw_mean_return(rng, r):
    lo = r + rng.uniform(-0.15, 0.1)
    return MeanReturnInterval(lo, lo + rng.uniform(0.005, 0.1), rng.uniform(0.1, 0.5))


def draw_volatility(rng, r):
    lo = rng.uniform(0.01, 0.2)
    return VolatilityInterval(lo, lo + rng.uniform(0.005, 0.3), r + rng.uniform(-0.15, 0.15))


def draw_structured(rng, r):
    while True:
        coupling = rng.choice([-1, 1]) * rng.uniform(0.05, 1.0)
        mu0, s0 = rng.uniform(-0.05, 0.1), rng.uniform(0.05, 0.2)
        z_lo = rng.uniform(-0.15, 0.1)
        z_hi = z_lo + rng.uniform(0.01, 0.2)
        if min(s0 + coupling * z_lo, s0 + coupling * z_hi) >= 0.01:
            return Structured(mu0, s0, float(coupling), z_lo, z_hi)


def draw_rectangle(rng, r):
    mlo = r + rng.uniform(-0.15, 0.1)
    slo = rng.uniform(0.01, 0.2)
    return Rectangle(mlo, mlo + rng.uniform(0.005, 0.1), slo, slo + rng.uniform(0.005, 0.3))


DRAWS = {
    "mean_return": draw_mean_return,
    "volatility": draw_volatility,
    "structured": draw_structured,
    "rectangle": draw_rectangle,
}


def random_instances(kind: str, n: int, seed: int):
    """Yield (spec, kappa, g, r) tuples."""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        kappa, g, r = draw_common(rng)
        yield DRAWS[kind](rng, r), kappa, g, r
