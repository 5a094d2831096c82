"""Command line front end.

Subcommands:
    run       execute the configured experiment and write CSV outputs
    sweep     rerun the experiment over a parameter grid
    bound     evaluate the steady-state error bound for the config
    selftest  condensed internal consistency battery

Configuration comes from a JSON file (--config) holding any subset of
the ExperimentConfig fields; --seed and --trials override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from mtrls import analysis, harness
from mtrls.synthdata import generate_ground_truth

DEFAULT_GRIDS = {
    "beta": (0.1, 0.5, 1.0, 2.0, 5.0),
    "gamma": (0.1, 0.5, 1.0, 2.0, 5.0),
    "lam": (0.98, 0.99, 0.995, 0.999),
}


def _load_config(args) -> harness.ExperimentConfig:
    if args.config is not None:
        cfg = harness.ExperimentConfig.from_json(args.config)
    else:
        cfg = harness.ExperimentConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    results = harness.run_experiment(cfg, out_dir=out, parallel=args.parallel)
    steadies = [r.oracle_steady for r in results]
    print(f"trials: {len(results)}")
    print(f"benchmark steady relative error: mean {np.mean(steadies):.4f}")
    for alg in ("admm", "subgrad"):
        if alg not in cfg.algorithms:
            continue
        times = [r.success_time[alg] for r in results if r.success_time.get(alg) is not None]
        rate = len(times) / len(results)
        mean_t = f"{np.mean(times):.1f}" if times else "n/a"
        wall = np.mean([r.wall_clock_per_step[alg] for r in results])
        print(
            f"{alg}: success {len(times)}/{len(results)} ({rate:.0%}), "
            f"mean success time {mean_t}, {wall * 1e3:.2f} ms/step"
        )
    print(f"outputs in {out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if args.values is not None:
        values = [float(v) for v in args.values.split(",")]
    elif args.parameter in DEFAULT_GRIDS:
        values = list(DEFAULT_GRIDS[args.parameter])
    else:
        print(f"no default grid for {args.parameter!r}; pass --values", file=sys.stderr)
        return 2
    out = Path(args.out)
    rows = harness.run_sweep(cfg, args.parameter, values, out_dir=out, parallel=args.parallel)
    for row in rows:
        mean_t = "n/a" if np.isnan(row.mean_success_time) else f"{row.mean_success_time:.1f}"
        print(
            f"{row.parameter}={row.value}: {row.algorithm} "
            f"{row.successes}/{cfg.trials} successes, mean success time {mean_t}"
        )
    print(f"outputs in {out}")
    return 0


def _cmd_bound(args) -> int:
    cfg = _load_config(args)
    graph = harness.build_graph_from_config(cfg)
    r_true = np.stack([analysis.uniform_input_correlation(cfg.dim)] * graph.n_nodes)
    truth = generate_ground_truth(
        graph,
        dim=cfg.dim,
        n_zeros=cfg.n_zeros,
        noise_level=cfg.noise_level,
        drift_level=cfg.drift_level,
        horizon=0,
        seed=np.random.SeedSequence(cfg.seed, spawn_key=(0, 0)),
        zero_mean_noise=cfg.zero_mean_noise,
    )
    report = analysis.compute_bound(
        graph,
        r_true,
        truth.weights[0],
        alpha=cfg.alpha,
        beta=cfg.beta,
        gamma=cfg.gamma,
        lam=cfg.lam,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"report": report.to_dict(), "config": cfg.to_dict()}
    (out / "bound.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"contraction factor: {report.sigma_norm:.6f}")
    print(f"excitation margin: {report.assumption4_margin:.6f} (ok={report.assumption4_ok})")
    print(f"step size admissible: {report.assumption5_ok}")
    if report.bound is None:
        print("bound: undefined (mean recursion not contractive)")
    else:
        print(f"bound: {report.bound:.6f}")
    print(f"wrote {out / 'bound.json'}")
    return 0


def _cmd_selftest(args) -> int:
    from mtrls import selftest

    failures = selftest.run_all(quick=args.quick)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtrls",
        description="Networked sparse recursive least squares simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_parallel=True):
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--out", type=str, default="results", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--trials", type=int, default=None, help="trial count override")
        if needs_parallel:
            p.add_argument("--parallel", type=int, default=1, help="worker processes")

    p_run = sub.add_parser("run", help="run the experiment and write CSVs")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="rerun over a parameter grid")
    add_common(p_sweep)
    p_sweep.add_argument("--parameter", required=True, choices=harness.SWEEPABLE)
    p_sweep.add_argument("--values", type=str, default=None, help="comma separated grid")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bound = sub.add_parser("bound", help="evaluate the steady-state bound")
    add_common(p_bound, needs_parallel=False)
    p_bound.set_defaults(func=_cmd_bound)

    p_self = sub.add_parser("selftest", help="internal consistency battery")
    p_self.add_argument("--quick", action="store_true", help="smaller instances")
    p_self.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
