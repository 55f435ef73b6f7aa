import io
import logging

import numpy as np
import pandas as pd
import pytest

from core.errors import ConflictingFlags, MissingRequired, UnknownFlag, UsageError
from main import build_user_config, main, parse_invocation, parse_range


BRIDGE = ["bridge", "--generator", "model2", "--a", "1", "--b", "2", "--T", "1.5"]


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# =====================================================
# PARSING
# =====================================================
def test_parse_range():
    assert parse_range("1:6") == (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    assert parse_range("3:5", int) == (3, 4, 5)
    assert parse_range("0.5,1,2") == (0.5, 1.0, 2.0)
    assert parse_range("7", int) == (7,)

    with pytest.raises(UsageError):
        parse_range("5:3")
    with pytest.raises(UsageError):
        parse_range("a,b")


@pytest.mark.parametrize("argv, error", [
    ([], MissingRequired),
    (["transmogrify"], UnknownFlag),
    (BRIDGE + ["--bogus", "1"], UnknownFlag),
    (["bridge", "--generator", "model2", "--a", "1", "--b", "2"], MissingRequired),
    (BRIDGE + ["--generator-file", "g.txt"], ConflictingFlags),
    (BRIDGE + ["--method", "xyz"], UsageError),
    (["bench", "--experiment", "speed"], MissingRequired),
    (["bench", "--experiment", "stationary", "--plot-script"], MissingRequired),
    (["bench", "--experiment", "accuracy", "--methods", "rej,fast"], UsageError),
])
def test_parse_errors(argv, error):
    with pytest.raises(error):
        parse_invocation(argv)


def test_parse_bench_ranges():
    inv = parse_invocation(["bench", "--experiment", "speed", "--n", "3:5", "--T", "1,2", "--seed", "9"])

    assert inv.flags["n"] == (3, 4, 5)
    assert inv.flags["T"] == (1.0, 2.0)
    assert inv.flags["seed"] == 9
    assert not inv.flags["seed_defaulted"]


# =====================================================
# EXIT CODES
# =====================================================
def test_usage_errors_exit_2(capsys):
    code, out, err = _run(capsys, BRIDGE + ["--bogus"])

    assert code == 2
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_domain_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n-1 2\n1 -1\n")

    code, _, err = _run(capsys, ["stationary", "--generator-file", str(bad), "--seed", "1"])
    assert code == 1
    assert "RowSumNonzero" in err


def test_state_out_of_range_exit_2(capsys):
    code, _, err = _run(capsys, ["bridge", "--generator", "model2", "--a", "4", "--b", "1", "--T", "1", "--seed", "1"])
    assert code == 2
    assert err.startswith("--a must be in 1..3")


def test_missing_observation_file_exit_1(capsys, tmp_path):
    code, _, err = _run(capsys, ["estimate", "--algo", "mcem", "--obs", str(tmp_path / "none.csv"), "--seed", "1"])
    assert code == 1
    assert "not found" in err


# =====================================================
# SUBCOMMANDS
# =====================================================
def test_bridge_output(capsys):
    code, out, _ = _run(capsys, BRIDGE + ["--method", "bis", "--seed", "7"])
    assert code == 0

    lines = out.splitlines()
    assert lines[0] == "time,state"
    assert lines[1] == "0,1"
    assert lines[-1].startswith("1.5,")
    assert lines[-1].endswith(",2")

    times = [float(line.split(",")[0]) for line in lines[1:]]
    assert all(a < b for a, b in zip(times, times[1:]))


@pytest.mark.parametrize("method", ["rej", "mor", "dir", "uni", "bis", "tir"])
def test_bridge_is_deterministic(capsys, method):
    argv = BRIDGE + ["--method", method, "--seed", "11"]

    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second


def test_default_seed_warns(capsys, caplog):
    with caplog.at_level(logging.WARNING):
        code = main(BRIDGE)

    assert code == 0
    assert any("no --seed given" in r.getMessage() for r in caplog.records)


def test_config_file_matches_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 5\nmethod = uni\n")

    _, from_file, _ = _run(capsys, BRIDGE + ["--config", str(cfg)])
    _, from_flags, _ = _run(capsys, BRIDGE + ["--seed", "5", "--method", "uni"])
    assert from_file == from_flags


def test_tir_mode_alias(capsys):
    argv = BRIDGE + ["--method", "tir", "--seed", "3", "--tir-mode"]

    _, paper, _ = _run(capsys, argv + ["paper"])
    _, alias, _ = _run(capsys, argv + ["forward"])
    _, reversed_, _ = _run(capsys, argv + ["reversed"])
    assert paper == alias
    assert paper.splitlines()[0] == reversed_.splitlines()[0] == "time,state"


def test_bench_resume_flag():
    argv = ["bench", "--experiment", "stationary", "--seed", "1"]

    assert build_user_config(parse_invocation(argv + ["--resume"]))["bench"]["resume"] is True
    assert "resume" not in build_user_config(parse_invocation(argv))["bench"]


def test_simulate_observations(capsys):
    code, out, _ = _run(capsys, ["simulate", "--generator", "study4", "--T", "2", "--observe", "0.5", "--seed", "3"])
    assert code == 0

    lines = out.splitlines()
    assert lines[0] == "time,state"
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "0.5", "1", "1.5", "2"]
    assert all(1 <= int(line.split(",")[1]) <= 4 for line in lines[1:])


def test_simulate_path_to_file(capsys, tmp_path):
    out = tmp_path / "path.csv"
    code, stdout, _ = _run(capsys, ["simulate", "--generator", "uniform", "--n", "4", "--a", "2",
                                     "--T", "3", "--seed", "3", "--out", str(out)])
    assert code == 0
    assert stdout == ""

    df = pd.read_csv(out)
    assert df["state"].iloc[0] == 2
    assert df["time"].iloc[-1] == 3.0
    assert (tmp_path / "path.metrics.json").exists()


def test_stationary_output(capsys):
    code, out, _ = _run(capsys, ["stationary", "--generator", "uniform", "--n", "3", "--seed", "1"])
    assert code == 0

    lines = out.splitlines()
    assert lines[0] == "quantity,state,value"

    rho = float(lines[1].split(",")[2])
    assert lines[1].startswith("stationary_time,,")
    assert abs(rho - 3.25) <= 0.05

    pi = [float(line.split(",")[2]) for line in lines[2:]]
    np.testing.assert_allclose(pi, 1 / 3, atol=1e-12)


@pytest.fixture
def obs_file(capsys, tmp_path):
    path = tmp_path / "obs.csv"
    main(["simulate", "--generator", "model2", "--T", "10", "--observe", "0.5", "--seed", "2", "--out", str(path)])
    capsys.readouterr()
    return path


def test_estimate_mcem(capsys, obs_file):
    code, out, _ = _run(capsys, ["estimate", "--algo", "mcem", "--obs", str(obs_file), "--generator", "model2",
                                 "--iters", "2", "--bridges", "10", "--init", "1.0", "--method", "uni", "--seed", "4"])
    assert code == 0

    lines = out.splitlines()
    assert lines[0] == "iter,i,j,value"
    assert len(lines) == 1 + 2 * 6
    assert all(float(line.split(",")[3]) > 0 for line in lines[1:])


def test_estimate_gibbs(capsys, obs_file):
    code, out, _ = _run(capsys, ["estimate", "--algo", "gibbs", "--obs", str(obs_file), "--n", "3",
                                 "--iters", "3", "--burn-in", "1", "--method", "bis", "--seed", "4"])
    assert code == 0
    assert len(out.splitlines()) == 1 + 3 * 6


def test_bench_stationary_with_plot_script(capsys, tmp_path):
    out = tmp_path / "stat.csv"
    code, stdout, _ = _run(capsys, ["bench", "--experiment", "stationary", "--n", "3:4", "--seed", "1",
                                    "--out", str(out), "--plot-script"])
    assert code == 0
    assert stdout == ""

    df = pd.read_csv(out)
    assert list(df["metric"]) == ["stationary_time", "stationary_time"]
    assert (tmp_path / "stat_plots.py").exists()


def test_bench_accuracy_to_stdout(capsys):
    code, out, _ = _run(capsys, ["bench", "--experiment", "accuracy", "--n", "3", "--T", "1",
                                 "--methods", "uni,bis", "--m", "20", "--seed", "1"])
    assert code == 0

    df = pd.read_csv(io.StringIO(out))
    assert set(df["method"]) == {"uni", "bis"}
    assert set(df["metric"]) == {"N_norm1", "R_norm1"}


@pytest.mark.parametrize("argv", [
    ["simulate", "--generator", "model2", "--T", "4", "--seed", "6"],
    ["simulate", "--generator", "study4", "--T", "4", "--observe", "0.25", "--seed", "6"],
    ["stationary", "--generator", "model2", "--seed", "6"],
])
def test_commands_are_deterministic(capsys, argv):
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second


def test_estimate_is_deterministic(capsys, obs_file):
    argv = ["estimate", "--algo", "gibbs", "--obs", str(obs_file), "--n", "3",
            "--iters", "2", "--burn-in", "0", "--method", "tir", "--seed", "8"]

    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second
