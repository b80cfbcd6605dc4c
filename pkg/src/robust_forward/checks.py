"""Verification checks run by ``robust-forward verify``."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .model import log_drift_rate, premiums
from .scenario import Scenario
from .simulate import PreconditionError, SimConfig, Verdict, martingale_test
from .strategy import drift_coefficient_f, optimal_fraction
from .worst_case import (
    WorstCase,
    constraint_residual,
    grid_inner_inf,
    grid_minimax_oracle,
    mode_of,
    select_worst_case,
    theta_grid,
)

RESIDUAL_TOL = 1e-12
SADDLE_TOL = 1e-12
ORACLE_VALUE_TOL = 1e-6
SWEEP_POINTS = 500
DEFAULT_SIM = SimConfig(horizon=1.0, n_steps=1, n_paths=20_000, seed=20240601)


@dataclass(frozen=True)
class CheckResult:
    name: str
    segment: int
    passed: bool
    detail: str


@dataclass(frozen=True)
class SegmentSolution:
    g: float
    f: float
    worst: WorstCase
    pi_star: float


def solve_segments(sc: Scenario, paper_a: bool = False) -> list[SegmentSolution]:
    """Per-segment worst case, fraction and f, honouring the scenario overrides."""
    pref, r, mode = sc.preference, sc.r, mode_of(sc.ambiguity)
    out = []
    for g in pref.g:
        worst = select_worst_case(sc.ambiguity, pref.kappa, g, r, paper_a=paper_a)
        if sc.mu_star_override is not None:
            mu = sc.mu_star_override
            worst = replace(
                worst, mu_star=mu, premiums_at_star=premiums(mu, worst.sigma_star, r, g)
            )
        f = drift_coefficient_f(mode, worst, pref.kappa, g, r)
        if sc.f_override is not None:
            f = sc.f_override
        pi = optimal_fraction(worst, pref.kappa, g, r).pi_star
        out.append(SegmentSolution(g=g, f=f, worst=worst, pi_star=pi))
    return out


def _within_step(a: float, b: float, step: float) -> bool:
    return abs(a - b) <= step * (1.0 + 1e-9) + 1e-15


def run_checks(
    sc: Scenario,
    grid: int = 2000,
    paper_a: bool = False,
    euler: bool = False,
    sim: Optional[SimConfig] = None,
) -> list[CheckResult]:
    kappa, r, spec = sc.preference.kappa, sc.r, sc.ambiguity
    results: list[CheckResult] = []
    solutions = solve_segments(sc, paper_a=paper_a)
    has_grid = mode_of(spec).value != "none"

    for k, sol in enumerate(solutions):
        w, g, f, pi = sol.worst, sol.g, sol.f, sol.pi_star

        res = constraint_residual(w, pi, kappa, g, f, r)
        results.append(
            CheckResult("constraint_residual", k, abs(res) < RESIDUAL_TOL, f"residual={res:.3e}")
        )

        if not has_grid:
            continue

        oracle = grid_minimax_oracle(spec, kappa, g, r, theta_resolution=grid)
        expected = -drift_coefficient_f(w.mode, w, kappa, g, r)
        steps = oracle.steps
        ok_theta = _within_step(oracle.worst.mu_star, w.mu_star, steps.get("mu", 0.0)) and _within_step(
            oracle.worst.sigma_sq_star, w.sigma_sq_star, steps.get("sigma_sq", 0.0)
        )
        gap = abs(oracle.value - expected)
        results.append(
            CheckResult(
                "grid_oracle",
                k,
                ok_theta and gap < ORACLE_VALUE_TOL,
                f"grid mu*={oracle.worst.mu_star:.6f} sigma^2*={oracle.worst.sigma_sq_star:.6f} "
                f"value gap={gap:.2e} sup-inf/inf-sup gap={oracle.inf_sup - oracle.sup_inf:.2e}",
            )
        )

        sweep = theta_grid(spec, r, SWEEP_POINTS)
        lam_theta = log_drift_rate(pi, sweep.mu, sweep.sigma_sq, r, kappa, g, f)
        lam_at_star = log_drift_rate(pi, w.mu_star, w.sigma_sq_star, r, kappa, g, f)
        width = max(1.0, 2.0 * abs(pi))
        pis = np.linspace(pi - width, pi + width, SWEEP_POINTS)
        lam_pi = max(grid_inner_inf(sweep, p, r, kappa, g, f)[0] for p in pis)
        ok = (
            abs(lam_at_star) < SADDLE_TOL
            and float(np.min(lam_theta)) >= -SADDLE_TOL
            and lam_pi <= SADDLE_TOL
        )
        results.append(
            CheckResult(
                "saddle_signs",
                k,
                ok,
                f"lambda*={lam_at_star:.2e} min_theta={float(np.min(lam_theta)):.2e} max_pi={lam_pi:.2e}",
            )
        )

    cfg = sim or sc.simulation or replace(DEFAULT_SIM, x0=sc.market.initial_wealth, s0=sc.market.spot_price)
    pref = sc.preference.with_drift([s.f for s in solutions])
    first = solutions[pref.segment(0.0)]
    if pref.segment_end(pref.segment(0.0)) < cfg.horizon:
        cfg = replace(cfg, horizon=pref.segment_end(pref.segment(0.0)))
    try:
        base = martingale_test(cfg, first.pi_star, first.worst, pref, r, euler=euler)
        bumped = martingale_test(cfg, 1.2 * first.pi_star, first.worst, pref, r, euler=euler)
    except PreconditionError as exc:
        results.append(CheckResult("martingale", 0, False, str(exc)))
        return results
    bumped_ok = bumped.verdict is Verdict.SUPERMARTINGALE or (
        first.pi_star == 0 and bumped.verdict is Verdict.MARTINGALE
    )
    ok = base.verdict is Verdict.MARTINGALE and bumped_ok
    results.append(
        CheckResult(
            "martingale",
            0,
            ok,
            f"ratio={base.mc_mean_ratio:.5f}±{base.mc_std_error:.5f} ({base.verdict.value}); "
            f"1.2*pi: ratio={bumped.mc_mean_ratio:.5f} exponent={bumped.analytic_exponent:.2e} "
            f"({bumped.verdict.value})",
        )
    )
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(c.passed for c in results)
