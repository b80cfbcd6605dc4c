"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional

from .checks import all_passed, run_checks, solve_segments
from .model import DomainError, Premiums, Structured
from .scenario import Scenario, ScenarioError, load_scenario
from .simulate import martingale_test, simulate_paths
from .strategy import optimal_fraction
from .table import CSV_COLUMNS, published_pi, regenerate_table, structured_curve, ERRATUM_TOL
from .worst_case import Branch, Mode, WorstCase

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3
PATH_COLUMNS = ("path_id", "t", "S", "X", "alpha", "U")


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# JSON mirrors
# ---------------------------------------------------------------------------


def worst_case_to_dict(w: WorstCase) -> dict:
    return {
        "mu_star": w.mu_star,
        "mu_star_minus_r": w.mu_star - w.r,
        "sigma_sq_star": w.sigma_sq_star,
        "z_star": w.z_star,
        "branch": w.branch.value,
        "mode": w.mode.value,
        "r": w.r,
        "degenerate": w.degenerate,
        "premiums": asdict(w.premiums_at_star),
    }


def worst_case_from_dict(d: dict) -> WorstCase:
    return WorstCase(
        mu_star=d["mu_star"],
        sigma_sq_star=d["sigma_sq_star"],
        branch=Branch(d["branch"]),
        premiums_at_star=Premiums(**d["premiums"]),
        mode=Mode(d["mode"]),
        r=d["r"],
        z_star=d["z_star"],
        degenerate=d["degenerate"],
    )


def _erratum(sc: Scenario, g: float, pi: float) -> Optional[str]:
    if not isinstance(sc.ambiguity, Structured):
        return None
    pub = published_pi(sc.ambiguity, sc.preference.kappa, g)
    if pub is None or abs(pub - pi) <= ERRATUM_TOL:
        return None
    return (
        f"published pi* = {pub:.4f} for this configuration disagrees with the derived "
        f"pi* = {pi:.4f}; the derived value is reported"
    )


def _segment_reports(sc: Scenario, paper_a: bool) -> list[dict]:
    out = []
    pref = sc.preference
    for k, sol in enumerate(solve_segments(sc, paper_a=paper_a)):
        strat = optimal_fraction(sol.worst, pref.kappa, sol.g, sc.r)
        out.append(
            {
                "segment": k,
                "t_start": pref.breaks[k],
                "g": sol.g,
                "f": sol.f,
                "worst_case": worst_case_to_dict(sol.worst),
                "strategy": {
                    "pi_star": strat.pi_star,
                    "myopic": strat.myopic,
                    "hedging": strat.hedging,
                    "direction": strat.direction.value,
                    "total_premium": strat.total_premium,
                },
                "erratum": _erratum(sc, sol.g, strat.pi_star),
            }
        )
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _load(args) -> Scenario:
    if not args.scenario:
        raise InputError("--scenario is required for this command")
    try:
        return load_scenario(args.scenario)
    except OSError as exc:
        raise InputError(f"cannot read scenario: {exc}") from None


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise IOError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _warn_errata(reports: list[dict]) -> None:
    for rep in reports:
        if rep["erratum"]:
            print(f"warning: segment {rep['segment']}: {rep['erratum']}", file=sys.stderr)


def cmd_worst_case(args) -> int:
    sc = _load(args)
    reports = _segment_reports(sc, args.paper_a)
    _warn_errata(reports)
    if args.json:
        print(json.dumps({"segments": reports}, indent=2))
        return EXIT_OK
    for rep in reports:
        w = rep["worst_case"]
        p = w["premiums"]
        print(f"segment {rep['segment']} (t >= {rep['t_start']:.4f}, g = {rep['g']:.4f})")
        print(f"  mu*          : {w['mu_star']:.4f}")
        print(f"  mu* - r      : {w['mu_star_minus_r']:.4f}")
        print(f"  sigma*^2     : {w['sigma_sq_star']:.4f}")
        if w["z_star"] is not None:
            print(f"  z*           : {w['z_star']:.4f}")
        print(f"  branch       : {w['branch']}{' (degenerate tie)' if w['degenerate'] else ''}")
        rel = "undefined" if p["relative"] is None else f"{p['relative']:.4f}"
        print(
            f"  premiums     : market {p['market']:.4f}  utility {p['utility']:.4f}  "
            f"total {p['total']:.4f}  relative {rel}"
        )
    return EXIT_OK


def cmd_strategy(args) -> int:
    sc = _load(args)
    reports = _segment_reports(sc, args.paper_a)
    _warn_errata(reports)
    if args.json:
        print(json.dumps({"segments": reports}, indent=2))
        return EXIT_OK
    for rep in reports:
        s = rep["strategy"]
        print(f"segment {rep['segment']} (t >= {rep['t_start']:.4f}, g = {rep['g']:.4f})")
        print(f"  pi*          : {s['pi_star']:.4f}")
        print(f"  myopic       : {s['myopic']:.4f}")
        print(f"  hedging      : {s['hedging']:.4f}")
        print(f"  direction    : {s['direction']}")
        print(f"  f            : {rep['f']:.6f}")
    return EXIT_OK


def cmd_table(args) -> int:
    kwargs = {}
    if args.scenario:
        sc = _load(args)
        if not isinstance(sc.ambiguity, Structured) or sc.preference.n_segments != 1:
            raise InputError("table needs a structured scenario with constant g")
        kwargs = dict(
            kappa=sc.preference.kappa,
            mu0=sc.ambiguity.mu0,
            sigma0_sq=sc.ambiguity.sigma0_sq,
            g=sc.preference.g[0],
            r=sc.r,
        )
    rows = regenerate_table(paper_a=args.paper_a, **kwargs)
    for i, row in enumerate(rows, start=1):
        if row.erratum_flag:
            print(
                f"warning: row {i}: published pi* = {row.published_pi:.4f}, derived pi* = {row.pi_star:.4f}",
                file=sys.stderr,
            )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_curve(args) -> int:
    sc = _load(args)
    if not isinstance(sc.ambiguity, Structured):
        raise InputError("curve needs ambiguity.kind = structured")
    if sc.ambiguity.coupling == 0:
        raise InputError("curve needs a nonzero coupling")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("segment", "z", "f_hat", "f_hat_dd"))
    for k, g in enumerate(sc.preference.g):
        z, v, dd = structured_curve(sc.ambiguity, sc.preference.kappa, g, args.grid, paper_a=args.paper_a)
        for row in zip(z, v, dd):
            writer.writerow((k, *(repr(float(x)) for x in row)))
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _load(args)
    if sc.simulation is None:
        raise InputError("simulate needs a simulation section in the scenario")
    if not args.out:
        raise InputError("simulate needs --out <path>")
    sols = solve_segments(sc, paper_a=args.paper_a)
    pref = sc.preference.with_drift([s.f for s in sols])
    first = sols[0]
    pi = first.pi_star * sc.pi_scale
    cfg = sc.simulation
    bundle = simulate_paths(cfg, first.worst.mu_star, first.worst.sigma_star, sc.r, pi, pref, euler=args.euler)
    try:
        with open(args.out, "w", newline="") as fh:
            write_paths_csv(bundle, fh)
    except OSError as exc:
        raise IOError(f"cannot write {args.out}: {exc}") from exc

    if pref.segment_end(0) < cfg.horizon:
        cfg = replace(cfg, horizon=pref.segment_end(0))
    report = martingale_test(cfg, pi, first.worst, pref, sc.r, euler=args.euler)
    data = {
        "pi": pi,
        "analytic_exponent": report.analytic_exponent,
        "mc_mean_ratio": report.mc_mean_ratio,
        "mc_std_error": report.mc_std_error,
        "verdict": report.verdict.value,
        "n_paths": report.n_paths,
    }
    if args.json:
        print(json.dumps(data, indent=2))
    else:
        print(f"pi                : {pi:.4f}")
        print(f"analytic exponent : {report.analytic_exponent:.4e}")
        print(f"mean U ratio      : {report.mc_mean_ratio:.6f} (s.e. {report.mc_std_error:.6f})")
        print(f"verdict           : {report.verdict.value}")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _load(args)
    results = run_checks(sc, grid=args.grid, paper_a=args.paper_a, euler=args.euler)
    passed = all_passed(results)
    if args.json:
        print(json.dumps({"passed": passed, "checks": [asdict(c) for c in results]}, indent=2))
    else:
        for c in results:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name} (segment {c.segment}): {c.detail}")
        print("all checks passed" if passed else "verification FAILED")
    return EXIT_OK if passed else EXIT_FAILED


def write_paths_csv(bundle, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(PATH_COLUMNS)
    t = bundle.time_grid
    for i in range(bundle.asset.shape[0]):
        for j in range(t.shape[0]):
            writer.writerow(
                (
                    i,
                    repr(float(t[j])),
                    repr(float(bundle.asset[i, j])),
                    repr(float(bundle.wealth[i, j])),
                    repr(float(bundle.log_scale[i, j])),
                    repr(float(bundle.performance[i, j])),
                )
            )


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario file (key = value lines)")
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--out", help="write CSV output to this path")
    common.add_argument("--grid", type=int, default=2000, help="grid resolution (default 2000)")
    common.add_argument("--paper-a", action="store_true", help="use the as-published linear coefficient")
    common.add_argument("--euler", action="store_true", help="Euler stepping instead of exact lognormal")

    parser = argparse.ArgumentParser(
        prog="robust-forward",
        description="Worst-case beliefs and robust CRRA forward-performance strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_text in (
        ("worst-case", cmd_worst_case, "worst-case mean return and volatility"),
        ("strategy", cmd_strategy, "optimal fraction with myopic/hedging split"),
        ("table", cmd_table, "regenerate the structured-ambiguity example table as CSV"),
        ("curve", cmd_curve, "f_hat and its second derivative over [z_lo, z_hi] as CSV"),
        ("simulate", cmd_simulate, "simulate paths to CSV and report the martingale test"),
        ("verify", cmd_verify, "run residual, oracle, saddle and martingale checks"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.grid < 2:
        print("error: --grid must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (ScenarioError, InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
