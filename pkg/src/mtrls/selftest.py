"""Condensed internal consistency battery for the CLI.

Cross-checks the two ADMM realizations against each other, the local
closed-form solve against a dense linear solve, the rank-one inverse
recursion against fresh factorizations, the benchmark solver against
the unregularized closed form and its own optimality certificate, and
the shrinkage operator against grid search.  Prints one PASS/FAIL line
per check.
"""

from __future__ import annotations

import numpy as np

from mtrls.admm import (
    AdmmParams,
    admm_step,
    admm_step_reference,
    init_admm_state,
    init_reference_state,
    reference_aggregates,
    soft_threshold,
)
from mtrls.graph import random_graph
from mtrls.oracle import StaticProblem, optimality_residual, solve
from mtrls.rls import block_inverse, compute_F, init_rls_state, rank_one_F_update, update_statistics


def _check_equivalence(quick: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(101)
    n_cases = 3 if quick else 8
    worst = 0.0
    for _ in range(n_cases):
        n, m = int(rng.integers(3, 8)), int(rng.integers(2, 5))
        n_edges = int(rng.integers(1, n * (n - 1) // 2 + 1))
        graph = random_graph(n, n_edges, rng.integers(1 << 31))
        params = AdmmParams(
            lam=float(rng.uniform(0.9, 1.0)),
            beta=float(rng.uniform(0.2, 2.0)),
            gamma=float(rng.uniform(0.0, 1.0)),
            rho=float(rng.uniform(0.5, 2.0)),
        )
        rls_a = [init_rls_state(m, params.lam) for _ in range(n)]
        rls_b = [init_rls_state(m, params.lam) for _ in range(n)]
        st_a = init_admm_state(n, m)
        st_b = init_reference_state(graph, m)
        for _ in range(20 if quick else 40):
            u = rng.random((n, m))
            d = rng.random(n)
            admm_step(graph, rls_a, st_a, params, u, d)
            admm_step_reference(graph, rls_b, st_b, params, u, d)
            worst = max(worst, float(np.max(np.abs(st_a.w - st_b.w))))
            _, v_over, _, z_over = reference_aggregates(graph, st_b)
            worst = max(worst, float(np.max(np.abs(st_a.z_over - z_over))))
    return worst < 1e-10, f"max trajectory gap {worst:.2e}"


def _check_block_inverse(quick: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(3 if quick else 10):
        ka, kb = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        full = rng.random((ka + kb, ka + kb)) + (ka + kb) * np.eye(ka + kb)
        tl, tr, bl, br = block_inverse(
            full[:ka, :ka], full[:ka, ka:], full[ka:, :ka], full[ka:, ka:]
        )
        inv = np.block([[tl, tr], [bl, br]])
        worst = max(worst, float(np.max(np.abs(inv @ full - np.eye(ka + kb)))))
    return worst < 1e-10, f"max inverse residual {worst:.2e}"


def _check_rank_one(quick: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(303)
    m = 4
    state = init_rls_state(m, 1.0)
    compute_F(state, beta=1.0, rho=1.0, degree=2)
    fresh = init_rls_state(m, 1.0)
    worst = 0.0
    for _ in range(20 if quick else 100):
        u = rng.random(m)
        update_statistics(state, u, float(rng.random()))
        rank_one_F_update(state, u)
        update_statistics(fresh, u, 0.0)
        direct = compute_F(fresh, beta=1.0, rho=1.0, degree=2)
        worst = max(worst, float(np.max(np.abs(state.F - direct))))
    return worst < 1e-8, f"max recursion drift {worst:.2e}"


def _check_oracle(quick: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(404)
    n, m = 4, 3
    graph = random_graph(n, 4, 11)
    base = rng.random((n, m, 2 * m))
    r = np.einsum("nik,njk->nij", base, base)
    p = rng.standard_normal((n, m))
    plain = StaticProblem(R=r, p=p, graph=graph, beta=0.0, gamma=0.0)
    sol = solve(plain, tol=1e-10, max_iter=200_000)
    closed = np.stack([np.linalg.solve(r[i], p[i]) for i in range(n)])
    gap = float(np.max(np.abs(sol.w - closed)))
    reg = StaticProblem(R=r, p=p, graph=graph, beta=0.7, gamma=0.9)
    sol_reg = solve(reg, tol=1e-8, max_iter=200_000)
    res = optimality_residual(reg, sol_reg.w)
    ok = gap < 1e-8 and res < 1e-8 and sol.converged and sol_reg.converged
    return ok, f"closed-form gap {gap:.2e}, optimality residual {res:.2e}"


def _check_shrinkage(quick: bool) -> tuple[bool, str]:
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(30 if quick else 200):
        weight = float(rng.uniform(0.01, 3.0))
        penalty = float(rng.uniform(0.1, 3.0))
        v = float(rng.uniform(-4.0, 4.0))
        x_star = float(soft_threshold(np.array(v), weight / penalty))
        grid = np.arange(v - 3.0, v + 3.0 + 1e-9, 1e-3)
        objective = weight * np.abs(grid) + 0.5 * penalty * (grid - v) ** 2
        best = float(objective.min())
        ours = weight * abs(x_star) + 0.5 * penalty * (x_star - v) ** 2
        worst = max(worst, ours - best)
    return worst <= 1e-12, f"max objective excess over grid {worst:.2e}"


CHECKS = (
    ("aggregated vs explicit solver", _check_equivalence),
    ("block inverse", _check_block_inverse),
    ("rank-one inverse recursion", _check_rank_one),
    ("benchmark solver", _check_oracle),
    ("shrinkage operator", _check_shrinkage),
)


def run_all(quick: bool = False) -> list[str]:
    """Run every check, print one line each, return the failing names."""
    failures = []
    for name, fn in CHECKS:
        ok, detail = fn(quick)
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        if not ok:
            failures.append(name)
    return failures
