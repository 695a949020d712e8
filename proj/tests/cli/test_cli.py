import csv
import json
import math
import os
import subprocess

import pytest

CLI = os.environ.get("KBEMU_CLI", "kbemu")


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


def rows(path):
    with open(path) as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


def test_zero_design_size_is_a_config_error(tmp_path):
    r = run("design", "--model", "toy2d", "--n", 0, "--out", tmp_path)
    assert r.returncode == 2
    assert "n:" in r.stderr


def test_unknown_option_and_bad_model(tmp_path):
    assert run("design", "--bogus", 1).returncode == 2
    assert run("design", "--model", "nope", "--n", 3, "--out", tmp_path).returncode == 2


def test_design_csv_shape_and_bounds(tmp_path):
    r = run("design", "--model", "toy2d", "--n", 10, "--method", "maximin", "--seed", 3,
            "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    table = rows(tmp_path / "design.csv")
    assert len(table) == 11 and all(len(row) == 2 for row in table)
    for row in table[1:]:
        assert all(0.0 <= float(v) <= 1.0 for v in row)
    meta = json.loads((tmp_path / "design.json").read_text())
    assert meta["seed"] == 3 and len(meta["points"]) == 10


@pytest.mark.parametrize("method", ["maximin", "greedy-vopt"])
def test_reruns_are_byte_identical(tmp_path, method):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        r = run("design", "--model", "toy2d", "--n", 6, "--method", method, "--boundaries", "K",
                "--seed", 11, "--out", out)
        assert r.returncode == 0, r.stderr
        outs.append(((out / "design.csv").read_bytes(), (out / "design.json").read_bytes()))
    assert outs[0] == outs[1]


def test_emulate_boundary_surfaces_match_closed_forms(tmp_path):
    r = run("emulate", "--model", "toy2d", "--boundaries", "K", "--theta", 0.4, "--beta", 0,
            "--sigma2", 1, "--grid", 21, "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    mean = rows(tmp_path / "surface_mean.csv")
    sd = rows(tmp_path / "surface_sd.csv")
    assert mean[0] == ["x1", "x2", "mean"]
    assert len(mean) == 1 + 21 * 21
    for (a, b, m), (_, _, s) in zip(mean[1:], sd[1:]):
        a, b, m, s = map(float, (a, b, m, s))
        r2 = math.exp(-2 * a * a / 0.16)
        assert abs(m + 1.9 * math.exp(-a * a / 0.16) * math.sin(2 * math.pi * b)) < 1e-12
        assert abs(s * s - (1 - r2)) < 1e-12


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "toy2d", "n": 4, "seed": 5, "method": "lhc"}))
    r = run("design", "--config", cfg, "--n", 7, "--out", tmp_path / "o")
    assert r.returncode == 0, r.stderr
    assert len(rows(tmp_path / "o" / "design.csv")) == 8
    cfg.write_text(json.dumps({"model": "toy2d", "n": 4, "colour": "red"}))
    r = run("design", "--config", cfg, "--out", tmp_path / "p")
    assert r.returncode == 2 and "colour" in r.stderr


def test_diagnose_external_table(tmp_path):
    train = tmp_path / "train.csv"
    test = tmp_path / "test.csv"
    f = lambda a, b: math.sin(3 * a) + b * b
    pts = [(i / 4, j / 4) for i in range(5) for j in range(5)]
    train.write_text("a,b,y\n" + "".join(f"{a},{b},{f(a, b)}\n" for a, b in pts))
    test.write_text("a,b,y\n" + "".join(f"{a + 0.1},{b + 0.05},{f(a + 0.1, b + 0.05)}\n"
                                        for a, b in pts if a < 0.9 and b < 0.9))
    r = run("diagnose", "--model", "external-table", "--table", train, "--test-table", test,
            "--theta", 0.5, "--out", tmp_path / "d")
    assert r.returncode == 0, r.stderr
    summary = json.loads((tmp_path / "d" / "summary.json").read_text())
    assert summary["count"] == 16
    assert summary["rmse"] < 0.1


def test_study_toy(tmp_path):
    r = run("study", "--model", "toy2d", "--n", 8, "--n-diag", 50, "--maximin-candidates", 50,
            "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    table = rows(tmp_path / "study.csv")
    assert table[0][:3] == ["design", "boundaries", "n_train"]
    assert len(table) == 5
    assert "frac|S|>3" in r.stdout
