import json

import pytest

from relasym.cli import main as cli
from relasym.cli.output import RECORD_COLUMNS, read_csv, read_jsonl

GENERIC = """\
format_version: 1
system:
  sigma1: {interval: [-1, 1]}
  sigma2: {interval: [2, 3]}
  rho1: "rational(2 + x)"
  rho2: "exp(0.5*x)"
ray: {kind: diag, m: [1, 3]}
baseline: {n: [4, 10]}
"""

CONSTANT = GENERIC.replace('"rational(2 + x)"', '"const(2)"').replace('"exp(0.5*x)"', '"const(5)"')


@pytest.fixture
def write_cfg(tmp_path):
    def make(text, name="run.yaml"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def run(cfg, out, *extra):
    return cli.main([extra[0], "--config", cfg, "--out", str(out), *extra[1:]])


def test_asymptotics_generic_with_figures(write_cfg, tmp_path, capsys):
    out = tmp_path / "gen"
    assert run(write_cfg(GENERIC), out, "asymptotics") == 0
    rows = read_csv(out / "asymptotics.csv")
    assert tuple(rows[0].keys()) == RECORD_COLUMNS
    summary = read_csv(out / "asymptotics_summary.csv")
    sizes = [int(r["size"]) for r in summary]
    assert sizes == sorted(sizes) and sizes[0] == 2 and sizes[-1] == 6
    assert (out / "asymptotics.png").stat().st_size > 0
    assert (out / "config.yaml").exists() and (out / "asymptotics.log").exists()
    checks = read_jsonl(out / "asymptotics_checks.jsonl")
    assert all(c["passed"] for c in checks)
    assert "PASS" in capsys.readouterr().out


def test_fixed_point_constant_table(write_cfg, tmp_path):
    out = tmp_path / "const"
    assert run(write_cfg(CONSTANT), out, "fixed-point", "--no-figures") == 0
    rows = read_csv(out / "phi_grid.csv")
    assert {r["component"] for r in rows} == {"1", "2"}
    for r in rows:
        assert float(r["value"]) == pytest.approx(float(r["closed_form"]), abs=1e-10)
    assert not (out / "phi.png").exists()


@pytest.mark.parametrize("cmd", ["szego", "mop", "tn-verify"])
def test_other_commands_pass(write_cfg, tmp_path, cmd):
    out = tmp_path / cmd
    assert run(write_cfg(GENERIC), out, cmd, "--no-figures", "--max-index", "4") == 0


def test_failed_check_exit_1(write_cfg, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "MNT_ABS_TOL", 0.0)
    out = tmp_path / "base"
    assert run(write_cfg(GENERIC), out, "baseline", "--no-figures") == 1
    checks = read_jsonl(out / "baseline_checks.jsonl")
    assert [c["passed"] for c in checks].count(False) == 1


def test_error_exit_2(write_cfg, tmp_path, capsys):
    out = tmp_path / "err"
    cfg = write_cfg(GENERIC + "fixed_point: {max_iter: 1}\n")
    assert run(cfg, out, "fixed-point", "--no-figures") == 2
    err = json.loads((out / "error.json").read_text())
    assert set(err) == {"command", "error", "message"}
    assert err["command"] == "fixed-point" and err["error"] == "MaxIterations"
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1]) == err


def test_bad_config_exit_2(write_cfg, tmp_path, capsys):
    cfg = write_cfg(GENERIC.replace("[2, 3]", "[0, 3]"))
    assert run(cfg, tmp_path / "x", "mop") == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "ValidationError" and "overlap" in err["message"]


def test_bad_precision_flag(write_cfg, tmp_path):
    assert run(write_cfg(GENERIC), tmp_path / "p", "mop", "--precision-bits", "64") == 2
