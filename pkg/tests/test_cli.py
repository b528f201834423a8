import json
import subprocess
import sys

import numpy as np
import pytest

from betafield.cli import run


@pytest.fixture
def tri(tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0], [0, 2, 1.0]]}))
    return str(path)


def read_csv(path):
    lines = open(path).read().splitlines()
    return lines[0].split(","), np.array([[float(v) for v in line.split(",")] for line in lines[1:]])


def test_sample_beta_shape_and_meta(tri, tmp_path):
    out = str(tmp_path / "b.csv")
    assert run(["sample-beta", "--graph", tri, "--theta", "1,1,1", "--n", "1000", "--seed", "7", "--out", out]) == 0
    header, rows = read_csv(out)
    assert header == ["beta_0", "beta_1", "beta_2"] and rows.shape == (1000, 3)
    meta = json.loads(open(out + ".meta.json").read())
    assert meta["seed"] == 7 and meta["ordering"] == [0, 1, 2] and meta["config"]["theta"] == "1,1,1"


def test_path_prob_example(tri, capsys):
    assert run(["path-prob", "--graph", tri, "--a", "1,1,1", "--path", "0,1,0"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1 / 3, rel=1e-15)
    assert run(["path-prob", "--graph", tri, "--a", "1,1,1", "--path", "0,1,0", "--direct"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1 / 3, rel=1e-15)


def test_same_seed_byte_identical(tri, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"u{k}.csv"
        assert run(["sample-u", "--graph", tri, "--n", "300", "--seed", "3", "--out", str(out)]) == 0
        outs.append((out.read_bytes(), (tmp_path / f"u{k}.csv.meta.json").read_text().replace(f"u{k}", "")))
    assert outs[0] == outs[1]


def test_jobs_do_not_change_output(tri, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["sample-beta", "--graph", tri, "--n", "70000", "--seed", "1"]
    assert run(base + ["--out", str(a)]) == 0
    assert run(base + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_output_dir_env(tri, tmp_path, monkeypatch):
    monkeypatch.setenv("BETAFIELD_OUTPUT_DIR", str(tmp_path / "outdir"))
    assert run(["simulate-errw", "--graph", tri, "--n", "10", "--depth", "3", "--seed", "2"]) == 0
    header, rows = read_csv(tmp_path / "outdir" / "simulate-errw.csv")
    assert header == ["x_0", "x_1", "x_2", "x_3"] and np.all(rows[:, 0] == 0)


@pytest.mark.parametrize(
    "argv",
    [
        "sample-beta --graph {graph} --n 5 --out {out}",  # no --seed
        "sample-beta --graph {graph} --n 5 --seed 1 --theta 1,1 --out {out}",  # wrong length
        "sample-beta --graph {graph} --n 5 --seed 1 --theta 1,1,1 --theta-file x --out {out}",  # both forms
        "sample-beta --graph {graph} --n 5 --seed 1 --jobs 0 --out {out}",
        "sample-u --graph {graph} --n 5 --seed 1 --i0 9 --out {out}",
        "path-prob --graph {graph} --path 0,5",
        "magic-sample --graph {graph} --n 5 --seed 1 --e0 3 --out {out}",
        "density-nu --graph {graph} --beta 1,nan,1",
        "no-such-command",
    ],
)
def test_usage_errors(tri, tmp_path, argv):
    assert run(argv.format(graph=tri, out=tmp_path / "o.csv").split()) == 2
    assert not (tmp_path / "o.csv").exists()


def test_malformed_graph(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 4, "edges": [[0, 1, 1.0], [2, 3, 1.0]]}))
    assert run(["path-prob", "--graph", str(bad), "--path", "0,1"]) == 2
    assert run(["path-prob", "--graph", str(tmp_path / "missing.json"), "--path", "0,1"]) == 2


def test_densities(tri, capsys):
    assert run(["density-nu", "--graph", tri, "--beta", "2,2,2"]) == 0
    assert np.isfinite(float(capsys.readouterr().out))
    assert run(["density-nu", "--graph", tri, "--beta", "0.1,0.1,0.1"]) == 0
    assert float(capsys.readouterr().out) == -np.inf
    assert run(["density-q", "--graph", tri, "--u", "0,0,0"]) == 0
    assert np.isfinite(float(capsys.readouterr().out))
    assert run(["magic-density", "--graph", tri, "--constant"]) == 0
    assert np.isfinite(float(capsys.readouterr().out))
    assert run(["magic-density", "--graph", tri, "--y", "1,2,3"]) == 0
    assert np.isfinite(float(capsys.readouterr().out))


def test_couple_and_magic_sample(tri, tmp_path):
    out = tmp_path / "c.csv"
    assert run(["couple-u", "--graph", tri, "--n", "20", "--seed", "4", "--bases", "0,2", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:3] == ["u_0_0", "u_0_1", "u_0_2"] and np.all(rows[:, 0] == 0) and np.all(rows[:, 5] == 0)
    out = tmp_path / "m.csv"
    assert run(["magic-sample", "--graph", tri, "--n", "20", "--seed", "4", "--e0", "1", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert np.all(rows[:, 1] == 1.0)


def test_simulate_vrjp(tri, tmp_path):
    out = tmp_path / "v.csv"
    assert run(["simulate-vrjp", "--graph", tri, "--n", "20", "--seed", "4", "--t-end", "100", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert rows.shape == (20, 3)
    meta = json.loads(open(str(out) + ".meta.json").read())
    assert "converged" in meta and meta["t_end_used"] >= 100
    log = tmp_path / "log.csv"
    assert run(["simulate-vrjp", "--graph", tri, "--seed", "4", "--t-end", "30", "--log", "--out", str(log)]) == 0
    assert open(log).readline().startswith("step,y_time,z_time,vertex")


def test_verify_small_scale(tmp_path):
    report = tmp_path / "r.json"
    assert run(["verify", "matrix-tree", "--seed", "7", "--scale", "0.1", "--report", str(report)]) == 0
    assert json.loads(report.read_text())["passed"] is True
    assert run(["verify", "no-such-suite", "--seed", "7", "--report", str(report)]) == 2


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "betafield.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "betafield" in out.stdout
