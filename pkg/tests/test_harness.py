"""Experiment driver: scoring, success rule, files, config, CLI."""

import json
import subprocess
import sys

import numpy as np
import pytest

from mtrls.errors import ZeroTruthError
from mtrls.graph import from_edge_list
from mtrls.harness import (
    ExperimentConfig,
    build_graph_from_config,
    detect_success,
    relative_error,
    run_experiment,
    run_sweep,
    run_trial,
)

TINY = dict(
    n_nodes=5,
    n_edges=6,
    graph_seed=3,
    dim=4,
    n_zeros=2,
    noise_level=0.1,
    drift_level=0.02,
    horizon=40,
    trials=2,
    lam=0.95,
    beta=1.0,
    gamma=0.5,
    rho=1.0,
    alpha=1e-3,
    seed=777,
    solve_every=10,
    benchmark_tol=1e-6,
    benchmark_max_iter=3000,
    snapshots=(10, 20),
    success_window=5,
    success_deadline=40,
)


def tiny_config(**overrides) -> ExperimentConfig:
    data = dict(TINY)
    data.update(overrides)
    return ExperimentConfig(**data)


def test_relative_error_reference_points():
    w_true = np.array([[1.0, 2.0], [0.5, 0.0]])
    assert relative_error(w_true, w_true) == 0.0
    assert relative_error(np.zeros_like(w_true), w_true) == pytest.approx(1.0)
    assert relative_error(2.0 * w_true, w_true) == pytest.approx(1.0)
    with pytest.raises(ZeroTruthError):
        relative_error(w_true, np.zeros_like(w_true))


def test_success_low_curve_reports_first_window_midpoint():
    curve = np.full(1000, 0.5)
    assert detect_success(curve, benchmark_steady=1.0) == 10


def test_success_never_for_high_curve():
    curve = np.full(1000, 2.0)
    assert detect_success(curve, benchmark_steady=1.0) is None


def test_success_after_drop_uses_window_average():
    # 2.0 until t=99, then 0.9: the first qualifying window starts at
    # t=97 (mean (3*2 + 17*0.9)/20 = 1.065 < 1.1), midpoint 106
    curve = np.where(np.arange(1, 1001) < 100, 2.0, 0.9)
    assert detect_success(curve, benchmark_steady=1.0) == 106


def test_success_scans_short_curves_to_their_end():
    curve = np.full(30, 0.5)
    assert detect_success(curve, benchmark_steady=1.0, deadline=1000) == 10
    assert detect_success(np.full(10, 0.5), benchmark_steady=1.0, window=20) is None


def test_success_respects_deadline():
    curve = np.concatenate([np.full(500, 2.0), np.full(500, 0.5)])
    assert detect_success(curve, benchmark_steady=1.0, deadline=400) is None
    assert detect_success(curve, benchmark_steady=1.0, deadline=1000) is not None


def test_config_roundtrip_and_unknown_key(tmp_path):
    cfg = tiny_config()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = ExperimentConfig.from_json(path)
    assert again == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"not_a_field": 1})


def test_config_defaults_are_basic_setup():
    cfg = ExperimentConfig()
    assert cfg.n_nodes == 20
    assert cfg.n_edges == 40
    assert cfg.dim == 20
    assert cfg.n_zeros == 18
    assert cfg.lam == 0.995
    assert cfg.beta == 1.0 and cfg.gamma == 1.0


def test_trials_are_deterministic():
    cfg = tiny_config()
    g = build_graph_from_config(cfg)
    a = run_trial(cfg, g, trial=0)
    b = run_trial(cfg, g, trial=0)
    c = run_trial(cfg, g, trial=1)
    for alg in a.curves:
        assert np.array_equal(a.curves[alg], b.curves[alg])
        assert not np.array_equal(a.curves[alg], c.curves[alg])
    assert a.oracle_steady == b.oracle_steady


def test_trial_curves_are_finite_and_scored():
    cfg = tiny_config()
    g = build_graph_from_config(cfg)
    res = run_trial(cfg, g, trial=0)
    assert set(res.curves) == {"admm", "subgrad", "oracle"}
    for curve in res.curves.values():
        assert curve.shape == (40,)
        assert np.all(np.isfinite(curve))
    assert set(res.per_node["admm"]) == {10, 20}
    assert res.per_node["admm"][10].shape == (5,)
    assert set(res.success_time) == {"admm", "subgrad"}
    assert res.oracle_steady == res.curves["oracle"][-1]
    assert set(res.wall_clock_per_step) == {"admm", "subgrad", "oracle"}


def test_experiment_writes_expected_files(tmp_path):
    cfg = tiny_config()
    results = run_experiment(cfg, out_dir=tmp_path)
    assert len(results) == 2
    for name in ("learning_curve.csv", "per_node.csv", "graph.txt", "manifest.json"):
        assert (tmp_path / name).exists()

    lines = (tmp_path / "learning_curve.csv").read_text().splitlines()
    assert lines[0] == "algorithm,trial,t,rel_error"
    assert len(lines) == 1 + 3 * 2 * 40
    algs, trials, ts, errs = zip(*(ln.split(",") for ln in lines[1:]))
    assert set(algs) == {"admm", "subgrad", "oracle"}
    assert set(trials) == {"0", "1"}
    assert min(int(t) for t in ts) == 1 and max(int(t) for t in ts) == 40
    assert all(np.isfinite(float(e)) for e in errs)

    lines = (tmp_path / "per_node.csv").read_text().splitlines()
    assert lines[0] == "algorithm,trial,snapshot_t,node,rel_error"
    assert len(lines) == 1 + 3 * 2 * 2 * 5

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"] == cfg.to_dict()
    for key in ("package_version", "python_version", "numpy_version", "scipy_version"):
        assert key in manifest
    assert "wall" not in json.dumps(manifest)

    graph = build_graph_from_config(cfg)
    parsed = from_edge_list((tmp_path / "graph.txt").read_text())
    assert parsed.edges == graph.edges


def test_experiment_outputs_are_reproducible(tmp_path):
    cfg = tiny_config()
    run_experiment(cfg, out_dir=tmp_path / "a")
    run_experiment(cfg, out_dir=tmp_path / "b")
    for name in ("learning_curve.csv", "per_node.csv", "graph.txt", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fixed_edge_list_overrides_random_topology(tmp_path):
    text = "# nodes 5\n0 1\n1 2\n2 3\n3 4\n"
    path = tmp_path / "graph.txt"
    path.write_text(text)
    cfg = tiny_config(edge_list_path=str(path))
    g = build_graph_from_config(cfg)
    assert g.edges == ((0, 1), (1, 2), (2, 3), (3, 4))


def test_sweep_degenerate_grid_matches_direct_run(tmp_path):
    cfg = tiny_config()
    rows = run_sweep(cfg, "beta", [cfg.beta], out_dir=tmp_path)
    results = run_experiment(cfg, out_dir=None)
    by_alg = {row.algorithm: row for row in rows}
    assert set(by_alg) == {"admm", "subgrad"}
    for alg, row in by_alg.items():
        wins = [r.success_time[alg] for r in results if r.success_time.get(alg) is not None]
        assert row.successes == len(wins)
        if wins:
            assert row.mean_success_time == pytest.approx(np.mean(wins))
        else:
            assert np.isnan(row.mean_success_time)
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "parameter,value,algorithm,successes,mean_success_time"
    assert len(lines) == 1 + len(rows)


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(ValueError):
        run_sweep(tiny_config(), "horizon", [10])


def _cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "mtrls", *argv],
        capture_output=True,
        text=True,
        timeout=300,
    )


def test_cli_run_writes_outputs(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(dict(TINY)))
    proc = _cli("run", "--config", str(cfg_path), "--out", str(tmp_path / "res"), "--trials", "1")
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "res" / "learning_curve.csv").exists()
    assert "success" in proc.stdout
    manifest = json.loads((tmp_path / "res" / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 1


def test_cli_sweep_writes_table(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(dict(TINY)))
    proc = _cli(
        "sweep",
        "--config",
        str(cfg_path),
        "--out",
        str(tmp_path / "res"),
        "--trials",
        "1",
        "--parameter",
        "beta",
        "--values",
        "0.5,1.0",
    )
    assert proc.returncode == 0, proc.stderr
    lines = (tmp_path / "res" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "parameter,value,algorithm,successes,mean_success_time"
    assert len(lines) == 1 + 2 * 2


def test_cli_bound_writes_report(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(dict(TINY)))
    proc = _cli("bound", "--config", str(cfg_path), "--out", str(tmp_path / "res"))
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "res" / "bound.json").read_text())
    assert set(payload) == {"report", "config"}
    assert "sigma_norm" in payload["report"]
    assert payload["config"]["n_nodes"] == 5
