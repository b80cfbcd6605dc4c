"""Regeneration of the structured-ambiguity example table and f_hat curves."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .model import Structured
from .strategy import Direction, optimal_fraction
from .worst_case import structured_coefficients, structured_objective, worst_case_structured

DEFAULT_KAPPA = 0.4
DEFAULT_MU0 = 0.02
DEFAULT_SIGMA0_SQ = 0.1
DEFAULT_G = 0.1

# (z_lo, z_hi, coupling, published pi*, published premium sign)
REFERENCE_ROWS = (
    (-0.15, -0.08, 0.5, -0.0795, "-"),
    (-0.08, 0.07, 0.5, -0.0059, "-"),
    (0.02, 0.12, 0.5, 0.7727, "+"),
    (-0.15, -0.08, -0.5, -0.5476, "-"),
    (-0.08, 0.07, -0.5, 0.0066, "+"),
    (0.02, 0.12, -0.5, 0.9074, "+"),
)
ERRATUM_TOL = 5e-4

CSV_COLUMNS = (
    "z1",
    "z2",
    "coupling",
    "z_star",
    "mu_star_minus_r",
    "sigma_sq_star",
    "pi_star",
    "premium_sign",
    "erratum_flag",
)


@dataclass(frozen=True)
class TableRow:
    z1: float
    z2: float
    coupling: float
    z_star: float
    mu_star_minus_r: float
    sigma_sq_star: float
    pi_star: float
    premium_sign: str
    erratum_flag: bool
    published_pi: float
    branch: str

    def csv_fields(self) -> list[str]:
        d = asdict(self)
        return [
            "true" if d[c] is True else "false" if d[c] is False else repr(d[c]) if isinstance(d[c], float) else str(d[c])
            for c in CSV_COLUMNS
        ]


_SIGN = {Direction.LONG: "+", Direction.SHORT: "-", Direction.FLAT: "0"}


def published_pi(spec: Structured, kappa: float, g: float) -> Optional[float]:
    """Published pi* for a scenario matching one of the reference rows, else None."""
    if not np.allclose(
        (kappa, spec.mu0, spec.sigma0_sq, g), (DEFAULT_KAPPA, DEFAULT_MU0, DEFAULT_SIGMA0_SQ, DEFAULT_G)
    ):
        return None
    for z_lo, z_hi, coupling, pi, _ in REFERENCE_ROWS:
        if np.allclose((spec.z_lo, spec.z_hi, spec.coupling), (z_lo, z_hi, coupling)):
            return pi
    return None


def regenerate_table(
    kappa: float = DEFAULT_KAPPA,
    mu0: float = DEFAULT_MU0,
    sigma0_sq: float = DEFAULT_SIGMA0_SQ,
    g: float = DEFAULT_G,
    r: float = 0.0,
    paper_a: bool = False,
) -> list[TableRow]:
    rows = []
    for z_lo, z_hi, coupling, pi_pub, _ in REFERENCE_ROWS:
        spec = Structured(mu0=mu0, sigma0_sq=sigma0_sq, coupling=coupling, z_lo=z_lo, z_hi=z_hi)
        worst = worst_case_structured(spec, kappa, g, r, paper_a=paper_a)
        strat = optimal_fraction(worst, kappa, g, r)
        rows.append(
            TableRow(
                z1=z_lo,
                z2=z_hi,
                coupling=coupling,
                z_star=worst.z_star,
                mu_star_minus_r=worst.mu_star - r,
                sigma_sq_star=worst.sigma_sq_star,
                pi_star=strat.pi_star,
                premium_sign=_SIGN[strat.direction],
                erratum_flag=abs(strat.pi_star - pi_pub) > ERRATUM_TOL,
                published_pi=pi_pub,
                branch=worst.branch.value,
            )
        )
    return rows


def structured_curve(spec: Structured, kappa: float, g: float, n: int, paper_a: bool = False):
    """Return (z, f_hat, f_hat'') on an inclusive n-point grid over [z_lo, z_hi]."""
    z = np.linspace(spec.z_lo, spec.z_hi, n)
    coeffs = structured_coefficients(spec, kappa, g, paper_a=paper_a)
    value, curvature = structured_objective(z, spec, kappa, coeffs)
    return z, value, curvature
