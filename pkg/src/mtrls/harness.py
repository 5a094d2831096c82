"""Experiment harness: configuration, trial execution, metrics, outputs.

A trial draws one ground truth trajectory and one measurement stream,
runs each selected algorithm over the horizon from a cold start, and
scores every step against the moving truth.  The centralized benchmark
curve is always computed because the success criterion is relative to
it.  All randomness flows from one master seed through fixed-purpose
substreams, so results are bit-reproducible and adding or removing an
algorithm never changes the data any other algorithm sees.
"""

from __future__ import annotations

import dataclasses
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

import mtrls
from mtrls.admm import AdmmParams, admm_step, init_admm_state
from mtrls.errors import ZeroTruthError
from mtrls.graph import Graph, from_edge_list, random_graph, to_edge_list
from mtrls.oracle import StaticProblem, solve
from mtrls.rls import init_rls_state
from mtrls.subgrad import SubgradParams, init_subgrad_state, subgrad_step
from mtrls.synthdata import generate_ground_truth, measurement_block

KNOWN_ALGORITHMS = ("admm", "subgrad", "oracle")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; every field has a sensible default.

    The defaults reproduce the basic tracking scenario: 20 nodes, 40
    random edges, 20-tap filters with 18 zero entries, mild noise and
    drift, and a 1000-step horizon.
    """

    n_nodes: int = 20
    n_edges: int = 40
    graph_seed: int = 7
    edge_list_path: str | None = None
    dim: int = 20
    n_zeros: int = 18
    noise_level: float = 0.1
    drift_level: float = 0.02
    horizon: int = 1000
    trials: int = 30
    algorithms: tuple[str, ...] = ("admm", "subgrad", "oracle")
    lam: float = 0.995
    beta: float = 1.0
    gamma: float = 1.0
    rho: float = 1.0
    alpha: float = 5e-4
    seed: int = 12345
    zero_mean_noise: bool = False
    solve_every: int = 1
    benchmark_tol: float = 1e-6
    benchmark_max_iter: int = 5000
    snapshots: tuple[int, ...] = (200, 500)
    success_window: int = 20
    success_factor: float = 1.1
    success_deadline: int = 1000

    def __post_init__(self) -> None:
        unknown = set(self.algorithms) - set(KNOWN_ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        if self.solve_every < 1:
            raise ValueError("solve_every must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        clean = dict(data)
        for key in ("algorithms", "snapshots"):
            if key in clean and clean[key] is not None:
                clean[key] = tuple(clean[key])
        return cls(**clean)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["algorithms"] = list(self.algorithms)
        out["snapshots"] = list(self.snapshots)
        return out


@dataclass
class TrialResult:
    """Per-trial metrics for every algorithm that ran.

    curves map algorithm name to the length-horizon relative error
    trajectory (entry i is time i+1).  per_node maps algorithm name to
    {snapshot time: per-node relative errors}.  success_time holds the
    detected success midpoint or None.  Wall-clock numbers are
    diagnostics only and are never written to the data files.
    """

    trial: int
    oracle_steady: float
    curves: dict[str, np.ndarray] = field(default_factory=dict)
    per_node: dict[str, dict[int, np.ndarray]] = field(default_factory=dict)
    success_time: dict[str, int | None] = field(default_factory=dict)
    wall_clock_per_step: dict[str, float] = field(default_factory=dict)


def relative_error(w: np.ndarray, w_true: np.ndarray) -> float:
    """Norm of the stacked estimation error over the norm of the truth.

    Raises:
        ZeroTruthError: the ground truth is identically zero.
    """
    w = np.asarray(w, dtype=float).ravel()
    w_true = np.asarray(w_true, dtype=float).ravel()
    denom = float(np.linalg.norm(w_true))
    if denom == 0.0:
        raise ZeroTruthError("relative error undefined for all-zero truth")
    return float(np.linalg.norm(w - w_true)) / denom


def detect_success(
    curve,
    benchmark_steady: float,
    window: int = 20,
    factor: float = 1.1,
    deadline: int = 1000,
) -> int | None:
    """First time the curve stays near the benchmark for a full window.

    Scans windows [t, t+window-1] (1-based times) with t+window-1 <=
    deadline; the curve succeeds at the earliest window whose mean
    relative error is below factor * benchmark_steady, and the reported
    success time is that window's floor midpoint t + window//2 - 1.
    Returns None if no window qualifies.  A curve shorter than the
    deadline is scanned to its end.
    """
    curve = np.asarray(curve, dtype=float)
    deadline = min(int(deadline), curve.size)
    if window <= 0 or deadline < window:
        return None
    threshold = factor * benchmark_steady
    csum = np.concatenate(([0.0], np.cumsum(curve[:deadline])))
    means = (csum[window:] - csum[:-window]) / window
    hits = np.nonzero(means < threshold)[0]
    if hits.size == 0:
        return None
    start_t = int(hits[0]) + 1
    return start_t + window // 2 - 1


def build_graph_from_config(config: ExperimentConfig) -> Graph:
    """Load the topology from an edge-list file or sample it by seed."""
    if config.edge_list_path is not None:
        return from_edge_list(Path(config.edge_list_path).read_text())
    return random_graph(config.n_nodes, config.n_edges, config.graph_seed)


def _truth_seed(config: ExperimentConfig, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.seed, spawn_key=(trial, 0))


def _measurement_seed(config: ExperimentConfig, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.seed, spawn_key=(trial, 1))


def _per_node_errors(w: np.ndarray, w_true: np.ndarray) -> np.ndarray:
    num = np.linalg.norm(w - w_true, axis=1)
    denom = np.linalg.norm(w_true, axis=1)
    out = np.full(w.shape[0], np.nan)
    ok = denom > 0.0
    out[ok] = num[ok] / denom[ok]
    return out


def run_trial(config: ExperimentConfig, graph: Graph, trial: int) -> TrialResult:
    """Run one independent trial and score every algorithm."""
    horizon = config.horizon
    truth = generate_ground_truth(
        graph,
        dim=config.dim,
        n_zeros=config.n_zeros,
        noise_level=config.noise_level,
        drift_level=config.drift_level,
        horizon=horizon,
        seed=_truth_seed(config, trial),
        zero_mean_noise=config.zero_mean_noise,
    )
    U, D = measurement_block(truth, _measurement_seed(config, trial))
    snaps = tuple(t for t in config.snapshots if 1 <= t <= horizon)
    deadline = min(config.success_deadline, horizon)

    curves: dict[str, np.ndarray] = {}
    per_node: dict[str, dict[int, np.ndarray]] = {}
    wall: dict[str, float] = {}

    if "admm" in config.algorithms:
        params = AdmmParams(lam=config.lam, beta=config.beta, gamma=config.gamma, rho=config.rho)
        rls = [init_rls_state(config.dim, config.lam) for _ in range(graph.n_nodes)]
        st = init_admm_state(graph.n_nodes, config.dim)
        curve = np.empty(horizon)
        nodes: dict[int, np.ndarray] = {}
        t0 = time.perf_counter()
        for t in range(1, horizon + 1):
            admm_step(graph, rls, st, params, U[t], D[t])
            curve[t - 1] = relative_error(st.w, truth.weights[t])
            if t in snaps:
                nodes[t] = _per_node_errors(st.w, truth.weights[t])
        wall["admm"] = (time.perf_counter() - t0) / horizon
        curves["admm"] = curve
        per_node["admm"] = nodes

    if "subgrad" in config.algorithms:
        params_s = SubgradParams(
            alpha=config.alpha, lam=config.lam, beta=config.beta, gamma=config.gamma
        )
        rls = [init_rls_state(config.dim, config.lam) for _ in range(graph.n_nodes)]
        st_s = init_subgrad_state(graph.n_nodes, config.dim)
        curve = np.empty(horizon)
        nodes = {}
        t0 = time.perf_counter()
        for t in range(1, horizon + 1):
            subgrad_step(graph, rls, st_s, params_s, U[t], D[t])
            curve[t - 1] = relative_error(st_s.w, truth.weights[t])
            if t in snaps:
                nodes[t] = _per_node_errors(st_s.w, truth.weights[t])
        wall["subgrad"] = (time.perf_counter() - t0) / horizon
        curves["subgrad"] = curve
        per_node["subgrad"] = nodes

    # benchmark curve: always computed, it calibrates the success test
    r_stack = np.zeros((graph.n_nodes, config.dim, config.dim))
    p_stack = np.zeros((graph.n_nodes, config.dim))
    w_bench = np.zeros((graph.n_nodes, config.dim))
    curve = np.empty(horizon)
    nodes = {}
    t0 = time.perf_counter()
    for t in range(1, horizon + 1):
        r_stack *= config.lam
        r_stack += np.einsum("ni,nj->nij", U[t], U[t])
        p_stack *= config.lam
        p_stack += D[t][:, None] * U[t]
        if t == 1 or t == horizon or t % config.solve_every == 0 or t in snaps:
            problem = StaticProblem(
                R=r_stack, p=p_stack, graph=graph, beta=config.beta, gamma=config.gamma
            )
            w_bench = solve(
                problem,
                tol=config.benchmark_tol,
                max_iter=config.benchmark_max_iter,
                w0=w_bench,
            ).w
        curve[t - 1] = relative_error(w_bench, truth.weights[t])
        if t in snaps:
            nodes[t] = _per_node_errors(w_bench, truth.weights[t])
    wall["oracle"] = (time.perf_counter() - t0) / horizon
    oracle_steady = float(curve[-1])
    if "oracle" in config.algorithms:
        curves["oracle"] = curve
        per_node["oracle"] = nodes

    success: dict[str, int | None] = {}
    for alg in ("admm", "subgrad"):
        if alg in curves:
            success[alg] = detect_success(
                curves[alg],
                oracle_steady,
                window=config.success_window,
                factor=config.success_factor,
                deadline=deadline,
            )
    return TrialResult(
        trial=trial,
        oracle_steady=oracle_steady,
        curves=curves,
        per_node=per_node,
        success_time=success,
        wall_clock_per_step=wall,
    )


def _trial_worker(args) -> TrialResult:
    config, graph, trial = args
    return run_trial(config, graph, trial)


def run_experiment(
    config: ExperimentConfig,
    out_dir=None,
    parallel: int = 1,
    graph: Graph | None = None,
) -> list[TrialResult]:
    """Run all trials, optionally across processes, and write outputs.

    Trials are independent; results are assembled in trial order, so
    the output files do not depend on scheduling.
    """
    if graph is None:
        graph = build_graph_from_config(config)
    tasks = [(config, graph, t) for t in range(config.trials)]
    if parallel > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_trial_worker, tasks))
    else:
        results = [_trial_worker(task) for task in tasks]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_learning_curves(results, out / "learning_curve.csv")
        write_per_node(results, out / "per_node.csv")
        (out / "graph.txt").write_text(to_edge_list(graph))
        write_manifest(config, out / "manifest.json")
    return results


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------


def write_learning_curves(results: list[TrialResult], path) -> None:
    """CSV with columns algorithm,trial,t,rel_error; one row per step."""
    with open(path, "w", newline="") as fh:
        fh.write("algorithm,trial,t,rel_error\n")
        for res in results:
            for alg in sorted(res.curves):
                curve = res.curves[alg]
                for i in range(curve.size):
                    fh.write(f"{alg},{res.trial},{i + 1},{float(curve[i])!r}\n")


def write_per_node(results: list[TrialResult], path) -> None:
    """CSV with columns algorithm,trial,snapshot_t,node,rel_error."""
    with open(path, "w", newline="") as fh:
        fh.write("algorithm,trial,snapshot_t,node,rel_error\n")
        for res in results:
            for alg in sorted(res.per_node):
                for snap in sorted(res.per_node[alg]):
                    errors = res.per_node[alg][snap]
                    for node in range(errors.size):
                        fh.write(f"{alg},{res.trial},{snap},{node},{float(errors[node])!r}\n")


def write_manifest(config: ExperimentConfig, path) -> None:
    """Record the exact configuration and environment of a run."""
    manifest = {
        "config": config.to_dict(),
        "package_version": mtrls.__version__,
        "python_version": platform.python_version(),
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEPABLE = ("beta", "gamma", "lam", "rho", "alpha", "noise_level", "drift_level")


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    algorithm: str
    successes: int  # out of config.trials (recorded in the manifest)
    mean_success_time: float  # nan when no trial succeeded


def run_sweep(
    config: ExperimentConfig,
    parameter: str,
    values,
    out_dir=None,
    parallel: int = 1,
) -> list[SweepRow]:
    """Rerun the experiment once per parameter value and tally successes.

    Data generation does not depend on the swept solver parameters
    (and the topology seed is held fixed), so each algorithm sees the
    same streams at every grid point unless the swept parameter itself
    shapes the data.
    """
    if parameter not in SWEEPABLE:
        raise ValueError(f"parameter must be one of {SWEEPABLE}, got {parameter!r}")
    rows: list[SweepRow] = []
    for value in values:
        cfg = dataclasses.replace(config, **{parameter: float(value)})
        results = run_experiment(cfg, out_dir=None, parallel=parallel)
        for alg in ("admm", "subgrad"):
            if alg not in cfg.algorithms:
                continue
            times = [r.success_time[alg] for r in results if r.success_time.get(alg) is not None]
            rows.append(
                SweepRow(
                    parameter=parameter,
                    value=float(value),
                    algorithm=alg,
                    successes=len(times),
                    mean_success_time=float(np.mean(times)) if times else float("nan"),
                )
            )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep(rows, out / "sweep.csv")
        write_manifest(config, out / "manifest.json")
    return rows


def write_sweep(rows: list[SweepRow], path) -> None:
    """CSV with columns parameter,value,algorithm,successes,mean_success_time."""
    with open(path, "w", newline="") as fh:
        fh.write("parameter,value,algorithm,successes,mean_success_time\n")
        for row in rows:
            fh.write(
                f"{row.parameter},{row.value!r},{row.algorithm},"
                f"{row.successes},{row.mean_success_time!r}\n"
            )
