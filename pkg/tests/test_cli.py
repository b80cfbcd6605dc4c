import csv
import io
import json

import numpy as np
import pytest

from robust_forward.checks import solve_segments
from robust_forward.cli import main, worst_case_from_dict, worst_case_to_dict
from robust_forward.scenario import ScenarioError, parse_scenario
from robust_forward.table import CSV_COLUMNS
from robust_forward.worst_case import worst_case_structured

from helpers import table_spec

BASE = """\
# structured defaults
market.r = 0
preference.kappa = 0.4
preference.g = 0.1
ambiguity.kind = structured
ambiguity.mu0 = 0.02
ambiguity.sigma0_sq = 0.1
ambiguity.coupling = {coupling}
ambiguity.z_lo = {z_lo}
ambiguity.z_hi = {z_hi}
"""

SIM = """\
simulation.horizon = 1
simulation.n_steps = 2
simulation.n_paths = 50
simulation.seed = 7
"""

MEAN_INTERIOR = """\
market.r = 0.01
preference.kappa = 0.4
preference.g = 0.1
ambiguity.kind = mean_return
ambiguity.mu_lo = 0.0
ambiguity.mu_hi = 0.02
ambiguity.sigma = 0.2
"""


def write(tmp_path, text, name="s.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def row_scenario(tmp_path, row, extra=""):
    z_lo, z_hi = table_spec(row).z_lo, table_spec(row).z_hi
    return write(tmp_path, BASE.format(coupling=table_spec(row).coupling, z_lo=z_lo, z_hi=z_hi) + extra)


class TestScenarioParsing:
    def test_parse(self):
        sc = parse_scenario(BASE.format(coupling=0.5, z_lo=-0.08, z_hi=0.07))
        assert sc.ambiguity == table_spec(2) and sc.r == 0.0 and sc.simulation is None

    def test_segments(self):
        sc = parse_scenario(MEAN_INTERIOR.replace("preference.g = 0.1", "preference.g = 0:0.1, 2.5:0.3"))
        assert sc.preference.breaks == (0.0, 2.5) and sc.preference.g == (0.1, 0.3)

    @pytest.mark.parametrize(
        "text, key",
        [
            (MEAN_INTERIOR + "ambiguity.bogus = 1\n", "ambiguity.bogus"),
            (MEAN_INTERIOR.replace("ambiguity.sigma = 0.2", "ambiguity.sigma = abc"), "ambiguity.sigma"),
            (MEAN_INTERIOR.replace("ambiguity.mu_hi = 0.02\n", ""), "ambiguity.mu_hi"),
            (MEAN_INTERIOR + "market.r = 0.02\n", "market.r"),
            (MEAN_INTERIOR.replace("kappa = 0.4", "kappa = 1.5"), "preference.kappa"),
            ("preference.kappa 0.4\n", None),
        ],
    )
    def test_errors_name_the_key(self, text, key):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(text)
        if key is not None:
            assert key in str(exc.value)


class TestExitCodes:
    def test_ok(self, tmp_path, capsys):
        assert main(["worst-case", "--scenario", row_scenario(tmp_path, 2)]) == 0
        out = capsys.readouterr().out
        assert "-0.0289" in out and "Interior" in out

    def test_malformed_file(self, tmp_path, capsys):
        path = write(tmp_path, MEAN_INTERIOR + "ambiguity.bogus = 1\n")
        assert main(["strategy", "--scenario", path]) == 2
        assert "ambiguity.bogus" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["strategy", "--scenario", str(tmp_path / "nope.txt")]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_unwritable_output(self, tmp_path):
        path = row_scenario(tmp_path, 2, SIM)
        assert main(["simulate", "--scenario", path, "--out", str(tmp_path / "missing" / "p.csv")]) == 3

    def test_verify_ok(self, tmp_path, capsys):
        assert main(["verify", "--scenario", row_scenario(tmp_path, 2)]) == 0
        assert "all checks passed" in capsys.readouterr().out

    def test_verify_f_override(self, tmp_path, capsys):
        sc = parse_scenario(BASE.format(coupling=0.5, z_lo=-0.08, z_hi=0.07))
        f = solve_segments(sc)[0].f
        path = row_scenario(tmp_path, 2, f"preference.f_override = {f + 1e-3!r}\n")
        assert main(["verify", "--scenario", path]) == 1
        assert "[FAIL] constraint_residual" in capsys.readouterr().out

    def test_verify_mu_override(self, tmp_path, capsys):
        path = write(tmp_path, MEAN_INTERIOR + "override.mu_star = 0.016\n")
        assert main(["verify", "--scenario", path]) == 1
        assert "[FAIL] saddle_signs" in capsys.readouterr().out


class TestJson:
    def test_round_trip(self, tmp_path, capsys):
        assert main(["worst-case", "--json", "--scenario", row_scenario(tmp_path, 5)]) == 0
        data = json.loads(capsys.readouterr().out)
        w = worst_case_structured(table_spec(5), 0.4, 0.1, 0.0)
        assert worst_case_from_dict(data["segments"][0]["worst_case"]) == w
        assert worst_case_from_dict(worst_case_to_dict(w)) == w

    def test_strategy_json(self, tmp_path, capsys):
        assert main(["strategy", "--json", "--scenario", row_scenario(tmp_path, 6)]) == 0
        seg = json.loads(capsys.readouterr().out)["segments"][0]
        assert round(seg["strategy"]["pi_star"], 4) == 0.9074
        assert seg["strategy"]["direction"] == "Long"

    def test_erratum_warning(self, tmp_path, capsys):
        assert main(["strategy", "--scenario", row_scenario(tmp_path, 1)]) == 0
        cap = capsys.readouterr()
        assert "-1.5000" in cap.out and "-0.0795" in cap.err


class TestTable:
    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["table", "--out", str(a)]) == 0
        assert main(["table", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        rows = list(csv.DictReader(io.StringIO(a.read_text())))
        assert tuple(rows[0].keys()) == CSV_COLUMNS and len(rows) == 6
        assert "row 1" in capsys.readouterr().err

    def test_stdout(self, capsys):
        assert main(["table"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == ",".join(CSV_COLUMNS)


class TestCurve:
    @pytest.mark.parametrize("coupling, z_star", [(0.5, -0.0289), (-0.5, -0.0311)])
    def test_argmax_matches_selector(self, tmp_path, capsys, coupling, z_star):
        path = write(tmp_path, BASE.format(coupling=coupling, z_lo=-0.15, z_hi=0.15))
        assert main(["curve", "--scenario", path, "--grid", "601"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        z = np.array([float(r["z"]) for r in rows])
        v = np.array([float(r["f_hat"]) for r in rows])
        dd = np.array([float(r["f_hat_dd"]) for r in rows])
        assert np.all(dd < 0)
        assert abs(z[np.argmax(v)] - z_star) <= (z[1] - z[0]) + 5e-4

    def test_affine_when_b_vanishes(self, tmp_path, capsys):
        path = write(tmp_path, BASE.format(coupling=0.5, z_lo=-0.1, z_hi=0.1).replace("mu0 = 0.02", "mu0 = 0.2"))
        assert main(["curve", "--scenario", path, "--grid", "51"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        v = np.array([float(r["f_hat"]) for r in rows])
        assert np.allclose(np.diff(v, 2), 0.0, atol=1e-14)

    def test_non_structured(self, tmp_path):
        assert main(["curve", "--scenario", write(tmp_path, MEAN_INTERIOR)]) == 2


class TestSimulate:
    def test_deterministic_csv(self, tmp_path, capsys):
        path = row_scenario(tmp_path, 3, SIM)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--scenario", path, "--out", str(a)]) == 0
        assert main(["simulate", "--scenario", path, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0] == "path_id,t,S,X,alpha,U" and len(lines) == 1 + 50 * 3
        assert "Martingale" in capsys.readouterr().out

    def test_scaled_fraction_is_supermartingale(self, tmp_path, capsys):
        path = row_scenario(tmp_path, 3, SIM + "simulation.pi_scale = 1.2\n")
        assert main(["simulate", "--json", "--scenario", path, "--out", str(tmp_path / "p.csv")]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "Supermartingale" and report["analytic_exponent"] < 0

    def test_needs_simulation_section(self, tmp_path):
        path = row_scenario(tmp_path, 3)
        assert main(["simulate", "--scenario", path, "--out", str(tmp_path / "p.csv")]) == 2
