import csv
import io
import json

import numpy as np
import pytest
from click.testing import CliRunner

from gasketwalk import cli


def run(*args):
    res = CliRunner().invoke(cli.main, list(args))
    return res


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exit_dist_rationals():
    res = run("exit-dist", "--level", "1", "--nodes", "1024")
    assert res.exit_code == 0
    exact = {r["exact"] for r in rows(res.output)}
    assert {"1/8", "1/12"} <= exact


def test_byte_identical_outputs(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run("exit-dist", "--level", "2", "--nodes", "512", "--out", str(p)).exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert man["config"]["quadrature"]["nodes"] == 512
    assert any("excluded_nodes" in e for e in man["events"])


def test_config_file_overrides_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nodes = 256\nlevel = 1\n")
    out = tmp_path / "o.csv"
    res = run("--config", str(cfg), "exit-dist", "--out", str(out))
    assert res.exit_code == 0, res.output
    man = json.loads((tmp_path / "o.csv.manifest.json").read_text())
    assert man["config"]["quadrature"]["nodes"] == 256


@pytest.mark.parametrize("levels", ["0", "5..3", "x"])
def test_bad_levels_are_usage_errors(levels):
    res = run("exponents", "--levels", levels)
    assert res.exit_code == 2
    assert "Error" in res.output


def test_math_error_exit_code(monkeypatch):
    from gasketwalk import observables
    from gasketwalk.green import SingularityError

    def boom(*a, **k):
        raise SingularityError("K", 1e13, np.array([0]))

    monkeypatch.setattr(observables, "exit_distribution", boom)
    res = run("exit-dist", "--level", "1")
    assert res.exit_code == cli.EXIT_MATH


def test_invariant_failure_is_named(monkeypatch):
    from gasketwalk import observables

    real = observables.exit_distribution

    def inflated(*a, **k):
        d = real(*a, **k)
        d.blocks["a"] = d.blocks["a"] * 10
        return d

    monkeypatch.setattr(observables, "exit_distribution", inflated)
    res = run("exit-dist", "--level", "1", "--nodes", "256")
    assert res.exit_code == cli.EXIT_INVARIANT
    assert "invariant failed" in res.output


def test_classical_exponents_command():
    res = run("exponents", "--coin", "classical", "--levels", "8..25")
    assert res.exit_code == 0
    beta = [r for r in rows(res.output) if r["family"] == "beta"]
    assert all(abs(float(r["slope"]) - 0.7369655941662062) < 1e-6 for r in beta)


def test_passage_command():
    res = run("passage", "--level", "1", "--nodes", "1024")
    assert res.exit_code == 0
    assert "17/132" in res.output


def test_oracle_json():
    res = run("oracle", "--level", "1", "--tmax", "10", "--start", "0,0,e1")
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["max_mass_balance"] < 1e-12
    assert "2" in data["captured"]


def test_plot_data_single_level_has_no_fit():
    res = run("plot-data", "--coin", "classical", "--levels", "5", "--family", "delta")
    assert res.exit_code == 0
    r = rows(res.output)
    assert len(r) == 1 and r[0]["fitted_line"] == ""


def test_lattice_and_recurrence():
    assert run("lattice", "--level", "2").output.count("\n") == 2 * 15 - 1 + 1
    res = run("recurrence", "--levels", "2", "--nodes", "256")
    assert res.exit_code == 0 and len(rows(res.output)) == 12


def test_classical_phi_exact_column():
    res = run("classical", "--observable", "phi", "--levels", "3")
    assert "2/5" in res.output


def test_fmt_round_trip():
    x = 0.1 + 0.2
    assert float(cli.fmt(x)) == x
    assert cli.exact(17 / 132) == "17/132"
    assert cli.exact(0.3) == ""
