import csv
import json
import os
import subprocess
import sys

import pytest

from lubrication.cli import run

BFS_ARGS = ["--geometry", "bfs", "--Hin", "2", "--Hout", "1", "--l", "8", "--L", "16"]


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_solve_bfs(tmp_path):
    out = tmp_path / "out"
    code = run(["solve", *BFS_ARGS, "--Q", "1", "--PN", "0", "--U", "0", "--method", "pwl",
                "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "pressure.csv")
    assert rows[0] == ["x", "p", "dpdx"]
    assert float(rows[1][1]) == 108.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["method"] == "pwl"
    assert {"numpy", "scipy", "numba", "python"} <= set(manifest["versions"])
    assert manifest["wall_time_s"] > 0


@pytest.mark.parametrize("method", ["pwc", "fd"])
def test_solve_other_methods(tmp_path, method):
    code = run(["solve", *BFS_ARGS, "--Q", "1", "--method", method, "--N", "64",
                "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["p0"] == pytest.approx(108, rel=0.05)


def test_solve_with_velocity(tmp_path):
    code = run(["solve", *BFS_ARGS, "--Q", "1", "--velocity", "8,5", "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "velocity.csv")
    assert rows[0] == ["x", "y", "u", "v"] and len(rows) == 1 + 8 * 5


def test_solve_stokes_field(tmp_path):
    code = run(["solve", "--geometry", "flat", "--H", "1", "--L", "1", "--Q", "1",
                "--method", "stokes", "--stokes-delta", "0.125", "--out", str(tmp_path)])
    assert code == 0
    assert read_csv(tmp_path / "field.csv")[0] == ["x", "y", "mask", "psi", "u", "v", "p"]


def test_inverted_step_is_rejected(tmp_path, capsys):
    out = tmp_path / "never"
    code = run(["solve", "--geometry", "bfs", "--Hin", "1", "--Hout", "2", "--l", "8",
                "--L", "16", "--Q", "1", "--out", str(out)])
    assert code == 2
    err = capsys.readouterr().err.strip()
    assert "H_in" in err and "\n" not in err
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["solve", *BFS_ARGS],                                  # neither Q nor P0
    ["solve", *BFS_ARGS, "--Q", "1", "--P0", "3"],         # both
    ["solve", "--geometry", "logistic", "--Hin", "2", "--Hout", "1", "--lam", "32",
     "--L", "16", "--Q", "1"],                             # analytic height without N
    ["solve", *BFS_ARGS, "--Q", "1", "--method", "fd"],    # fd without N
    ["solve", *BFS_ARGS, "--Q", "1", "--method", "nope"],  # argparse choice
    ["converge", *BFS_ARGS, "--Q", "1", "--sizes", "8,16"],
    ["bench", *BFS_ARGS, "--Q", "1", "--sizes", "8,16,32", "--reps", "2"],
    ["compare", *BFS_ARGS, "--Q", "1", "--relaxation", "3"],
    ["frobnicate"],
])
def test_validation_exit_code(tmp_path, argv, capsys):
    out = tmp_path / "o"
    assert run([*argv, "--out", str(out)]) == 2
    assert len(capsys.readouterr().err.strip().splitlines()) == 1
    assert not out.exists()


def test_solver_failure_exit_code(tmp_path, capsys):
    code = run(["solve", *BFS_ARGS, "--Q", "1", "--method", "stokes", "--stokes-delta", "0.25",
                "--scheme", "sor", "--max-iter", "3", "--out", str(tmp_path)])
    assert code == 1
    assert "no convergence" in capsys.readouterr().err


def test_out_is_a_file(tmp_path):
    f = tmp_path / "file"
    f.write_text("x")
    assert run(["solve", *BFS_ARGS, "--Q", "1", "--out", str(f)]) == 2


def test_converge_sinusoid(tmp_path):
    code = run(["converge", "--geometry", "sinusoid-periodic", "--H0", "1", "--delta", "0.5",
                "--alpha", "6.283185307179586", "--U", "3", "--dP", "0", "--methods", "fd,pwc,pwl",
                "--sizes", "64,128,256,512,1024", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    for rep in report["convergence"]:
        assert rep["reference"] == "exact-sinusoid"
        assert rep["orders"]["l2"] == pytest.approx(2.0, abs=0.2)
    assert len(read_csv(tmp_path / "convergence.csv")) == 1 + 15


def test_bench(tmp_path):
    code = run(["bench", *BFS_ARGS, "--Q", "1", "--methods", "pwl,pwc,fd", "--sizes",
                "16,64,256", "--fd-sizes", "16,32,64", "--reps", "5", "--out", str(tmp_path)])
    assert code == 0
    timing = json.loads((tmp_path / "report.json").read_text())["timing"]
    assert timing["fd"]["sizes"] == [16, 32, 64]
    assert read_csv(tmp_path / "timing.csv")[0] == ["method", "N", "median_s"]


def test_compare(tmp_path):
    code = run(["compare", "--geometry", "flat", "--H", "1", "--L", "1", "--Q", "1",
                "--stokes-delta", "0.125,0.0625", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "comparison.csv")))
    assert len(rows) == 2 and rows[0]["recirculation"] == "False"
    assert (tmp_path / "field.csv").exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"geometry": "bfs", "params": {"H_in": 2, "H_out": 1, "l": 8, "L": 16},
                               "bc": {"Q": 2.0}, "method": "pwc"}))
    out = tmp_path / "o"
    assert run(["solve", "--config", str(cfg), "--Q", "1", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["method"] == "pwc" and report["flux"] == 1.0 and report["p0"] == 108.0


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert run(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_pressure_mode_flags(tmp_path):
    assert run(["solve", *BFS_ARGS, "--dP", "-108", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["flux"] == pytest.approx(1.0)


def test_outputs_are_deterministic(tmp_path):
    args = ["solve", "--geometry", "wedge", "--Hin", "2", "--Hout", "1", "--lin", "7",
            "--lout", "7", "--lwedge", "2", "--Q", "1", "--U", "0.5", "--velocity", "6,4"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run([*args, "--out", str(a)]) == 0
    assert run([*args, "--out", str(b)]) == 0
    for name in ("pressure.csv", "velocity.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seventeen_significant_digits(tmp_path):
    run(["solve", "--geometry", "wedge", "--Hin", "2", "--Hout", "1", "--lin", "1", "--lout", "1",
         "--lwedge", "1", "--Q", "0.3", "--out", str(tmp_path)])
    value = read_csv(tmp_path / "pressure.csv")[2][1]
    assert float(value) == float("%.17g" % float(value))
    assert len(value.replace("-", "").replace(".", "").lstrip("0")) >= 15


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lubrication", "solve", *BFS_ARGS, "--Q", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "lubrication", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "solve" in proc.stdout
