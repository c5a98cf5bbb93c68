import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from egtbench import __version__
from egtbench.cli import UsageError, main, parse_grid


def run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "-o", str(out)])
    return code, out


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


# -- grid syntax -----------------------------------------------------------


def test_parse_grid():
    assert parse_grid("0..1x3", "--pr") == [0.0, 0.5, 1.0]
    assert parse_grid("2.5", "--s") == [2.5]
    assert parse_grid("1..1x1", "--s") == [1.0]
    assert len(parse_grid("1..3x101", "--s")) == 101
    with pytest.raises(UsageError, match="--s"):
        parse_grid("1..x3", "--s")
    with pytest.raises(UsageError):
        parse_grid("0..1x0", "--s")


# -- equilibria ------------------------------------------------------------


def test_equilibria_json_and_closed_form(tmp_path, capsys):
    code, out = run(tmp_path, "e.json", "equilibria", "--n", "2", "--d", "2", "--trials", "100000", "--seed", "7")
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["mean_total"] - 0.5) < 3 * doc["stderr_total"]
    assert "closed form 0.5" in capsys.readouterr().err


def test_equilibria_manifest(tmp_path):
    code, out = run(tmp_path, "e.json", "equilibria", "--n", "3", "--d", "2", "--trials", "500", "--seed", "3")
    assert code == 0
    man = json.loads((tmp_path / "e.json.manifest.json").read_text())
    assert man["command"] == "equilibria"
    assert man["seed"] == 3
    assert man["version"] == __version__
    assert man["parameters"]["n"] == 3 and man["parameters"]["trials"] == 500
    assert man["duration_seconds"] >= 0


def test_equilibria_is_byte_identical(tmp_path):
    argv = ["equilibria", "--n", "2", "--d", "6", "--trials", "5000", "--seed", "1"]
    _, a = run(tmp_path, "a.json", *argv)
    _, b = run(tmp_path, "b.json", *argv, "--workers", "2")
    assert a.read_bytes() == b.read_bytes()


def test_equilibria_csv(tmp_path):
    code, out = run(tmp_path, "e.csv", "equilibria", "--n", "2", "--d", "4", "--trials", "200", "--format", "csv")
    assert code == 0
    (row,) = read_csv(out)
    assert list(row) == ["key", "mean_total", "stderr_total", "mean_stable", "p_max", "degenerate_trials"]
    assert row["key"] == "4"


def test_equilibria_stdout(capsys):
    assert main(["equilibria", "--n", "2", "--d", "3", "--trials", "50"]) == 0
    assert "mean_total" in json.loads(capsys.readouterr().out)


def test_equilibria_unsupported(tmp_path):
    code, _ = run(tmp_path, "x.json", "equilibria", "--n", "3", "--d", "7", "--trials", "10")
    assert code == 3
    code, _ = run(tmp_path, "x.json", "equilibria", "--n", "3", "--d", "3", "--trials", "10")
    assert code == 3


def test_equilibria_approximate(tmp_path):
    code, out = run(tmp_path, "g.json", "equilibria", "--n", "3", "--d", "3", "--trials", "5", "--approximate")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["approximate"] is True and doc["p_max"] is None


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["--n", "1", "--d", "2"], "--n"),
        (["--n", "2", "--d", "1"], "--d"),
        (["--n", "2", "--d", "2", "--trials", "0"], "--trials"),
        (["--n", "2", "--d", "2", "--r", "1.0"], "--r"),
        (["--n", "2", "--d", "2", "--r", "0.5", "--distribution", "uniform"], "--r"),
        (["--n", "2", "--d", "2", "--seed", "-4"], "--seed"),
    ],
)
def test_equilibria_usage_errors(argv, flag, capsys):
    assert main(["equilibria", *argv]) == 2
    assert flag in capsys.readouterr().err


def test_argparse_errors_exit_2(capsys):
    assert main(["equilibria", "--n", "x", "--d", "2"]) == 2
    assert main(["nonsense"]) == 2


def test_io_failure_exit_4(tmp_path):
    assert main(["equilibria", "--n", "2", "--d", "2", "--trials", "10", "-o", str(tmp_path / "missing" / "x.json")]) == 4
    assert main(["race", "--params", str(tmp_path / "nope.json")]) == 4


# -- asymptotics -----------------------------------------------------------


def test_asymptotics_rows(tmp_path):
    code, out = run(tmp_path, "a.csv", "asymptotics", "--d", "3,5,10", "--trials", "20000", "--seed", "2")
    assert code == 0
    rows = read_csv(out)
    assert [r["key"] for r in rows] == ["3", "5", "10"]
    means = [float(r["mean_total"]) for r in rows]
    assert means == sorted(means)


def test_asymptotics_two_players(tmp_path):
    code, out = run(tmp_path, "a.csv", "asymptotics", "--d", "2", "--trials", "50000")
    (row,) = read_csv(out)
    assert abs(float(row["mean_total"]) - 0.5) < 3 * float(row["stderr_total"])


@pytest.mark.parametrize("d", ["", ",", "1", "101", "3,x"])
def test_asymptotics_bad_d(d):
    assert main(["asymptotics", "--d", d, "--trials", "10"]) == 2


# -- correlation -----------------------------------------------------------


def test_correlation_trend(tmp_path):
    code, out = run(tmp_path, "c.csv", "correlation", "--d", "5", "--r", "0,0.5,0.9", "--trials", "30000", "--seed", "4")
    assert code == 0
    means = [float(r["mean_total"]) for r in read_csv(out)]
    assert means[0] >= means[1] >= means[2]


def test_correlation_zero_matches_equilibria(tmp_path):
    _, c = run(tmp_path, "c.csv", "correlation", "--n", "2", "--d", "4", "--r", "0", "--trials", "3000", "--seed", "8")
    _, e = run(tmp_path, "e.csv", "equilibria", "--n", "2", "--d", "4", "--trials", "3000", "--seed", "8", "--format", "csv")
    (rc,), (re_,) = read_csv(c), read_csv(e)
    for col in ("mean_total", "stderr_total", "mean_stable", "p_max", "degenerate_trials"):
        assert rc[col] == re_[col]


@pytest.mark.parametrize("r", ["1.0", "0.5,0.2", "-0.1", ""])
def test_correlation_bad_r(r):
    assert main(["correlation", "--d", "3", "--r", r, "--trials", "10"]) == 2


# -- race ------------------------------------------------------------------


def test_race_matrix(tmp_path):
    code, out = run(tmp_path, "m.json", "race", "--mode", "matrix", "--s", "2", "--pr", "0.5", "--c", "0")
    assert code == 0
    doc = json.loads(out.read_text())
    p = np.array(doc["payoffs"])
    assert p[0, 0] == 0.5 and p[1, 0] == 1.0 and p[0, 1] == 0.0 and p[1, 1] == 0.5


def test_race_neutral_fixation(tmp_path):
    code, out = run(tmp_path, "f.json", "race", "--mode", "fixation", "--beta-sel", "0", "--N", "40")
    assert code == 0
    rho = np.array(json.loads(out.read_text())["fixation_matrix"])
    off = ~np.eye(3, dtype=bool)
    assert np.all(rho[off] == 1 / 40)


def test_race_symmetric_override(tmp_path):
    code, out = run(tmp_path, "s.json", "race", "--mode", "stationary", "--matrix", json.dumps(np.ones((3, 3)).tolist()))
    assert code == 0
    dist = json.loads(out.read_text())["distribution"]
    np.testing.assert_allclose(list(dist.values()), [1 / 3] * 3, atol=1e-14)


def test_race_stationary_region(tmp_path):
    code, out = run(tmp_path, "s.json", "race", "--s", "1.5", "--pr", "0.5")
    assert code == 0
    assert json.loads(out.read_text())["region"] == "II"


def test_race_params_file(tmp_path):
    params = tmp_path / "p.json"
    params.write_text(json.dumps({"N": 20, "beta_sel": 0.0}))
    code, out = run(tmp_path, "f.json", "race", "--mode", "fixation", "--params", str(params))
    assert code == 0
    assert json.loads(out.read_text())["N"] == 20
    params.write_text(json.dumps({"speed": 3}))
    assert main(["race", "--params", str(params)]) == 2
    params.write_text("{not json")
    assert main(["race", "--params", str(params)]) == 2


def test_race_cs_mode_flag(tmp_path):
    _, a = run(tmp_path, "a.json", "race", "--mode", "matrix", "--W", "3", "--cs-mode", "mirror")
    p = np.array(json.loads(a.read_text())["payoffs"])
    assert p[2, 1] == p[1, 1] == p[1, 2]


def test_race_sweep(tmp_path):
    code, out = run(tmp_path, "sw.csv", "race", "--mode", "sweep", "--s", "1..3x11", "--pr", "0..1x11")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 121
    assert list(rows[0]) == ["s", "p_r", "freq_AS", "freq_AU", "freq_CS", "unsafe_frequency", "region"]
    assert {r["region"] for r in rows} == {"I", "II", "III"}


@pytest.mark.parametrize(
    "argv",
    [
        ["--s", "0.5"],
        ["--pr", "1.5"],
        ["--s", "1..3x3"],
        ["--mode", "sweep", "--matrix", "[[1,1,1],[1,1,1],[1,1,1]]"],
        ["--matrix", "[[1,2],[3,4]]"],
        ["--N", "1"],
    ],
)
def test_race_usage_errors(argv):
    assert main(["race", *argv]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "egtbench", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == __version__
