import json
import subprocess
import sys

import pytest

from nodalcount import cli
from nodalcount import montecarlo as M
from nodalcount.montecarlo import TrialRecord


def run(capsys, *argv):
    code = cli.parse_and_dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_missing_lambda_is_usage_error(capsys):
    code, out, err = run(capsys, "sim", "--domain", "disk")
    assert code == 1 and out == ""
    assert "--lambda" in err


def test_unknown_flag_lists_valid_flags(capsys):
    code, _, err = run(capsys, "kacrice", "--lambda", "20", "--bogus", "3")
    assert code == 1
    assert "--bogus" in err and "--grid" in err and "--window" in err


def test_bad_choice_and_bad_type(capsys):
    assert run(capsys, "kacrice", "--lambda", "20", "--window", "medium")[0] == 1
    assert run(capsys, "kacrice", "--lambda", "abc")[0] == 1
    assert run(capsys)[0] == 1


def test_help_and_version(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "sim" in out and "selftest" in out
    code, out, _ = run(capsys, "sim", "--help")
    assert code == 0 and "--eps" in out and "--refine-tol" in out
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip() == "1.0.0"


def test_empty_window_is_usage_error(capsys):
    code, out, err = run(capsys, "kacrice", "--window", "long", "--lambda", "1.0")
    assert code == 1 and "no eigenvalues" in err


def test_out_of_range_parameters(capsys):
    assert run(capsys, "kacrice", "--lambda", "500")[0] == 1
    assert run(capsys, "hopf", "--lambda", "20", "--delta", "0.5", "--trials", "1")[0] == 1
    assert run(capsys, "sim", "--lambda", "20", "--trials", "0")[0] == 1


def test_numerical_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(M, "run_trial", lambda model, config, trial: TrialRecord(trial, None))
    code, out, err = run(capsys, "sim", "--lambda", "20", "--trials", "10", "--kacrice-grid", "64")
    assert code == 2 and out == ""
    assert "excluded" in err


def test_kacrice_json(capsys):
    code, out, _ = run(capsys, "kacrice", "--window", "short", "--lambda", "30", "--grid", "256")
    data = json.loads(out)
    assert code == 0
    assert data["prediction"] == 30.0
    assert 20 < data["kacrice_z"] < 40
    assert data["modes"] > 0


def test_sim_writes_reproducible_files(capsys, tmp_path):
    args = ["sim", "--domain", "rectangle", "--a", "1", "--b", "1.3", "--window", "long", "--lambda", "18",
            "--trials", "20", "--seed", "4", "--eps", "1e-3", "--eps", "1e-2", "--kacrice-grid", "128"]
    run(capsys, *args, "--out", str(tmp_path / "a.json"))
    code, out, _ = run(capsys, *args, "--out", str(tmp_path / "b.json"))
    assert code == 0
    assert json.loads(out)["config"]["eps_relative_to_sup_norm"] == [0.001, 0.01]
    assert (tmp_path / "a.trials.csv").read_bytes() == (tmp_path / "b.trials.csv").read_bytes()
    assert (tmp_path / "a.trials.csv").read_text().splitlines()[0].endswith(
        "regularized_eps_0.001,regularized_eps_0.01")


def test_weyl_csv(capsys, tmp_path):
    path = tmp_path / "w.csv"
    code, out, _ = run(capsys, "weyl", "--lambda", "20", "25", "--grid", "32", "--placements", "2",
                       "--out", str(path))
    assert code == 0
    assert len(json.loads(out)["rows"]) == 12
    assert len(path.read_text().splitlines()) == 13


def test_slopes_and_hopf(capsys, tmp_path):
    code, out, _ = run(capsys, "slopes", "--window", "short", "--lambda", "20", "30", "--kacrice-grid", "128",
                       "--out", str(tmp_path / "s.json"))
    assert code == 0
    assert json.loads(out) == json.loads((tmp_path / "s.json").read_text())
    code, out, _ = run(capsys, "hopf", "--lambda", "20", "--trials", "10", "--seed", "2")
    assert code == 0
    assert json.loads(out)["match_fraction"] >= 0.9


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert all(c["ok"] for c in data["checks"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nodalcount", "kacrice", "--lambda", "12", "--grid", "64"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["modes"] > 0
    proc = subprocess.run([sys.executable, "-m", "nodalcount", "sim"], capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stdout == ""
