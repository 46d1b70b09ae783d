import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from graphon_steady import io
from graphon_steady.cli import main
from graphon_steady.config import ExperimentConfig, load_config, seed_override
from graphon_steady.errors import ValidationError

finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=25)
@given(st.integers(1, 6).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite)))
def test_matrix_csv_file_round_trip(tmp_path_factory, M):
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    io.write_matrix_csv(path, M)
    np.testing.assert_array_equal(io.read_matrix_csv(path), M)


def test_edge_list_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    A = np.triu((rng.random((9, 9)) < 0.4) * rng.random((9, 9)), 1)
    A = A + A.T
    io.write_edge_list(tmp_path / "e.txt", A)
    np.testing.assert_array_equal(io.read_edge_list(tmp_path / "e.txt"), A)


def test_table_and_json(tmp_path):
    io.write_table_csv(tmp_path / "t.csv", ["a", "b", "c"], [(1, 0.1, True), (2, math.pi, "x")])
    header, rows = io.read_table_csv(tmp_path / "t.csv")
    assert header == ["a", "b", "c"]
    assert float(rows[1][1]) == math.pi and rows[0][2] == "true"
    io.write_json(tmp_path / "j.json", {"x": np.float64(0.1), "v": np.arange(3), "z": 1 + 2j})
    assert io.read_json(tmp_path / "j.json") == {"v": [0, 1, 2], "x": 0.1, "z": [1.0, 2.0]}


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.atomic_write_text(tmp_path / "f.txt", "hello")
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]


def test_config_validation(tmp_path):
    with pytest.raises(ValidationError, match="n_list"):
        ExperimentConfig.from_dict({"n_list": []})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"model": {"model": "fitzhugh"}})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"solver": {"tolerance": 1}})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"kernel": {"family": "smallworld", "alpha": 0.9, "p": 0.5, "q": 0}})
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"model": "wilson_cowan", "lambda": 22, "mu": 4, "delta": 1},
                                "n_list": [10, 20], "seeds": [3], "solver": {"damping": 0.5}}))
    cfg = load_config(path)
    assert cfg.n_list == [10, 20] and cfg.solver.damping == 0.5
    assert cfg.build_model().params["lambda"] == 22


def test_seed_override(monkeypatch):
    monkeypatch.delenv("GRAPHON_SEED", raising=False)
    assert seed_override() is None
    monkeypatch.setenv("GRAPHON_SEED", "4, 5")
    assert seed_override() == [4, 5]
    assert seed_override("7") == [7]


@pytest.fixture
def er_kernel(tmp_path):
    path = tmp_path / "er.json"
    path.write_text(json.dumps({"family": "constant", "p": 0.5}))
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_files_and_idempotence(tmp_path, er_kernel, capsys):
    out = tmp_path / "a"
    code, stdout, _ = run(["sample", "--kernel", er_kernel, "--n", 100, "--seed", 1, "--out", out], capsys)
    assert code == 0 and "degree_deviation" in stdout
    first = (out / "adjacency_100_1.csv").read_bytes()
    assert (out / "manifest_100_1.json").exists()
    A = io.read_matrix_csv(out / "adjacency_100_1.csv")
    assert A.shape == (100, 100) and set(np.unique(A)) <= {0.0, 1.0}
    run(["sample", "--kernel", er_kernel, "--n", 100, "--seed", 1, "--out", out], capsys)
    assert (out / "adjacency_100_1.csv").read_bytes() == first
    summary = (out / "sample_summary.csv").read_bytes()
    run(["sample", "--kernel", er_kernel, "--n", 100, "--seed", 1, "--out", out], capsys)
    assert (out / "sample_summary.csv").read_bytes() == summary


def test_sample_deterministic_mode(tmp_path, capsys):
    kernel = json.dumps({"family": "smallworld", "alpha": 0.2, "p": 0.7, "q": 0.1})
    code, *_ = run(["sample", "--kernel", kernel, "--n", 20, "--mode", "deterministic", "--out", tmp_path], capsys)
    assert code == 0
    A = io.read_matrix_csv(tmp_path / "adjacency_20_det.csv")
    assert set(np.round(np.unique(A), 12)) <= {0.1, 0.7}


def test_solve_lv_row(tmp_path, er_kernel, capsys):
    code, stdout, _ = run(["solve", "--kernel", er_kernel, "--model", "lotka_volterra", "--param", "lambda=1",
                           "--n", 200, "--seed", 1, "--out", tmp_path, "--strict"], capsys)
    assert code == 0
    header, rows = io.read_table_csv(tmp_path / "solve_summary.csv")
    row = dict(zip(header, rows[0]))
    assert row["converged"] == "true" and float(row["residual"]) <= 1e-10
    report = io.read_json(tmp_path / "solve_200_1.json")
    assert report["converged"] and len(report["final_u"]) == 200


def test_solve_strict_failure(tmp_path, capsys):
    kernel = json.dumps({"family": "smallworld", "alpha": 0.2, "p": 1 / (0.4 * math.pi), "q": 0})
    argv = ["solve", "--kernel", kernel, "--model", "kuramoto", "--m", 5, "--n", 30, "--seed", 1, "--out", tmp_path]
    code, _, err = run(argv + ["--strict"], capsys)
    assert code != 0 and "n=30 seed=1" in err
    code, *_ = run(argv, capsys)
    assert code == 0


def test_global_flags_before_subcommand(tmp_path, er_kernel, capsys):
    code, *_ = run(["--out", tmp_path, "--seed-override", "2,3", "sample", "--kernel", er_kernel, "--n", 10], capsys)
    assert code == 0
    assert (tmp_path / "adjacency_10_2.csv").exists() and (tmp_path / "adjacency_10_3.csv").exists()


def test_jobs_do_not_change_outputs(tmp_path, er_kernel, capsys):
    base = ["solve", "--kernel", er_kernel, "--model", "lotka_volterra", "--param", "lambda=1",
            "--n", 40, "--n", 20, "--seed", 2, "--seed", 1]
    run(base + ["--out", tmp_path / "s"], capsys)
    run(base + ["--out", tmp_path / "p", "--jobs", 2], capsys)
    a = (tmp_path / "s" / "solve_summary.csv").read_bytes()
    assert a == (tmp_path / "p" / "solve_summary.csv").read_bytes()
    _, rows = io.read_table_csv(tmp_path / "s" / "solve_summary.csv")
    assert [(r[0], r[1]) for r in rows] == [("20", "1"), ("20", "2"), ("40", "1"), ("40", "2")]


def test_spectrum_ring_table_and_lv_clouds(tmp_path, er_kernel, capsys):
    kernel = json.dumps({"family": "smallworld", "alpha": 0.2, "p": 1 / (0.4 * math.pi), "q": 0})
    code, stdout, _ = run(["spectrum", "--kernel", kernel, "--model", "kuramoto", "--m", 1, "--n", 60, "--seed", 1,
                           "--damping", 0.7, "--max-iters", 500, "--ring-analytic", "--ell-max", 3,
                           "--out", tmp_path / "k"], capsys)
    assert code == 0 and "ell=-3" in stdout
    header, rows = io.read_table_csv(tmp_path / "k" / "ring_eigenvalues.csv")
    assert header == ["ell", "lambda"] and len(rows) == 7
    run(["spectrum", "--kernel", er_kernel, "--model", "lotka_volterra", "--param", "lambda=1", "--n", 80,
         "--seed", 1, "--out", tmp_path / "lv"], capsys)
    _, rows = io.read_table_csv(tmp_path / "lv" / "eigenvalues.csv")
    re = np.array([float(r[0]) for r in rows])
    assert np.all(np.minimum(np.abs(re + 1), np.abs(re + 2 / 3)) < 0.3)


def test_dynamics_and_probe(tmp_path, er_kernel, capsys):
    code, *_ = run(["dynamics", "--kernel", er_kernel, "--model", "lotka_volterra", "--param", "lambda=1",
                    "--n", 30, "--seed", 1, "--t-end", 20, "--trajectory", "--stride", 100, "--out", tmp_path,
                    "--strict"], capsys)
    assert code == 0
    header, rows = io.read_table_csv(tmp_path / "trajectory_30_1.csv")
    assert len(header) == 31 and len(rows) == 21
    code, *_ = run(["probe", "--kernel", er_kernel, "--model", "lotka_volterra", "--param", "lambda=0.5",
                    "--n", 50, "--seed", 1, "--pairs", 3, "--out", tmp_path], capsys)
    assert code == 0
    _, rows = io.read_table_csv(tmp_path / "probe.csv")
    assert float(rows[0][2]) < 1


def test_cutnorm_command(tmp_path, capsys):
    io.write_matrix_csv(tmp_path / "m.csv", [[1.0, -1.0], [-1.0, 1.0]])
    code, stdout, _ = run(["cutnorm", tmp_path / "m.csv", "--second"], capsys)
    assert code == 0
    out = json.loads(stdout)
    assert out["exact"] == 0.25 and out["second"]["exact"] == 1.0


def test_repro_unknown_id(tmp_path, capsys):
    code, _, err = run(["repro", "fig9", "--out", tmp_path], capsys)
    assert code == 2 and "fig1" in err and "lvbipartite" in err


def test_invalid_config_exit_code(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n_list": []}))
    code, _, err = run(["--config", path, "solve"], capsys)
    assert code == 2 and "n_list" in err


@pytest.mark.parametrize("figure", ["scurve", "lvbipartite"])
def test_repro_writes_manifest(tmp_path, capsys, figure):
    code, *_ = run(["repro", figure, "--out", tmp_path], capsys)
    assert code == 0
    manifest = io.read_json(tmp_path / figure / "manifest.json")
    assert manifest["figure"] == figure and manifest["files"]
    for name in manifest["files"]:
        if name.endswith(".csv"):
            io.read_table_csv(tmp_path / figure / name)


def test_repro_lvbipartite_two_levels(tmp_path, capsys):
    run(["repro", "lvbipartite", "--out", tmp_path], capsys)
    header, rows = io.read_table_csv(tmp_path / "lvbipartite" / "lvbipartite_b.csv")
    x = np.array([float(r[1]) for r in rows])
    u = np.array([float(r[3]) for r in rows])
    lo, hi = u[x < 0.3], u[x >= 0.3]
    assert lo.min() > hi.max()
