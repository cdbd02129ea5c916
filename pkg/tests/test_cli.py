import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from mdlpenalty.cli import main
from mdlpenalty.experiments import CSV_HEADER, RIDGE_METHODS, GgmConfig, RidgeConfig, ggm_cell, run_ridge


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


SMALL_RIDGE = ["ridge", "--n", "20,30", "--seeds", "2", "--test-size", "50", "--grid-count", "5", "--folds", "3"]
SMALL_GGM = ["ggm", "--m", "5", "--n", "40", "--seeds", "2", "--grid-count", "4", "--folds", "3"]


def test_ridge_row_contract(capsys):
    code, out, _ = run(SMALL_RIDGE, capsys)
    assert code == 0
    assert out.splitlines()[0] == CSV_HEADER
    got = rows(out)
    assert len(got) == len(RIDGE_METHODS) * 2 * 2
    assert {r["method"] for r in got} == set(RIDGE_METHODS)
    assert all(float(r["metric"]) >= 0 and r["dim"] == "50" and r["wall_time_ms"] == "0.0" for r in got)


def test_ggm_row_contract_and_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(SMALL_GGM + ["--out", str(a)], capsys)[0] == 0
    assert run(SMALL_GGM + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    got = rows(a.read_text())
    assert len(got) == 5 * 2 and all(r["dim"] == "5" for r in got)


def test_boundcheck_passes(capsys):
    code, out, _ = run(["boundcheck", "--lambda", "0.1,1,10"], capsys)
    assert code == 0 and "FAIL" not in out and out.count("PASS") == 2 * 3 * 3


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["ridge", "--methods", "mdlrs-full,nope"], "mdlrs-full, mdlrs-diag"),
        (["ggm", "--m", "4"], "m >= 5"),
        (["boundcheck", "--lambda", "0"], "positive"),
        (["ridge", "--csv", "missing.csv", "--target", "y"], "missing.csv"),
    ],
)
def test_bad_input_exits_two(argv, needle, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and needle in err and "usage:" in err and out == ""


def test_flag_beats_config_beats_default(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# small run\nseeds = 1\nn = 25\nmethods = cv-ridge\ntest-size = 20\ngrid_count = 3\nfolds = 2\n")
    out = run(["ridge", "--config", str(cfg)], capsys)[1]
    assert [(r["n"], r["seed"]) for r in rows(out)] == [("25", "0")]
    out = run(["ridge", "--config", str(cfg), "--seeds", "2"], capsys)[1]
    assert [(r["n"], r["seed"]) for r in rows(out)] == [("25", "0"), ("25", "1")]
    cfg.write_text("bogus = 1\n")
    assert run(["ridge", "--config", str(cfg)], capsys)[0] == 2


def test_csv_input(tmp_path, capsys):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 4))
    y = X @ [1.0, 0.0, -2.0, 0.5] + 0.1 * rng.normal(size=60)
    p = tmp_path / "d.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "c", "d", "y"])
        w.writerows(np.column_stack([X, y]).tolist())
    code, out, _ = run(["ridge", "--csv", str(p), "--target", "y", "--n", "40", "--seeds", "1", "--methods", "mdlrs-full", "--folds", "3"], capsys)
    assert code == 0
    (r,) = rows(out)
    assert r["dim"] == "4" and float(r["metric"]) < 0.3


def test_worker_processes_do_not_change_output(monkeypatch):
    cfg = RidgeConfig(n_values=(20,), seeds=2, methods=("mdlrs-diag", "bic-ridge"), test_size=30, grid=RidgeConfig().grid)
    serial = run_ridge(cfg, workers=1)
    monkeypatch.setenv("ULNML_THREADS", "2")
    parallel = run_ridge(cfg, workers=2)
    assert [r.csv_row() for r in serial] == [r.csv_row() for r in parallel]


def test_bad_thread_count(monkeypatch, capsys):
    monkeypatch.setenv("ULNML_THREADS", "zero")
    assert run(SMALL_GGM, capsys)[0] == 2


def test_ggm_mdlrs_reports_radius():
    r = ggm_cell(GgmConfig(), "mdlrs", 5, 60, 0)
    assert r.extra["radius_ok"] is True and r.extra["iterations"] <= 200


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mdlpenalty", "boundcheck", "--domain", "unbounded", "--lambda", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "all checks passed" in proc.stdout
