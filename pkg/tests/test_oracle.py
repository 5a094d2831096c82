"""Benchmark solver: objective algebra, optimality certificate, closed forms."""

import numpy as np
import pytest

from mtrls.errors import DimensionMismatchError
from mtrls.graph import build_graph, random_graph
from mtrls.oracle import (
    StaticProblem,
    lipschitz_bound,
    objective,
    optimality_residual,
    problem_from_rls,
    smooth_gradient,
    solve,
)
from mtrls.rls import init_rls_state, update_statistics


def _random_problem(seed, n=5, m=4, beta=0.8, gamma=0.3, edges=7):
    rng = np.random.default_rng(seed)
    graph = random_graph(n, edges, seed=seed + 1)
    a = rng.standard_normal((n, m, m))
    R = np.einsum("nij,nkj->nik", a, a) + 0.5 * np.eye(m)
    p = rng.standard_normal((n, m))
    return StaticProblem(R=R, p=p, graph=graph, beta=beta, gamma=gamma)


def test_problem_shape_validation():
    graph = build_graph(2, [(0, 1)])
    with pytest.raises(DimensionMismatchError):
        StaticProblem(R=np.zeros((2, 3, 3)), p=np.zeros((2, 4)), graph=graph, beta=1.0, gamma=1.0)
    with pytest.raises(DimensionMismatchError):
        StaticProblem(R=np.zeros((3, 2, 2)), p=np.zeros((3, 2)), graph=graph, beta=1.0, gamma=1.0)


def test_objective_hand_value_single_node():
    graph = build_graph(1, [])
    prob = StaticProblem(
        R=np.array([[[2.0]]]), p=np.array([[3.0]]), graph=graph, beta=0.0, gamma=1.0
    )
    # w R w - 2 p w + gamma |w| = 2 - 6 + 1
    assert objective(prob, np.array([[1.0]])) == pytest.approx(-3.0)


def test_objective_counts_each_edge_twice():
    graph = build_graph(2, [(0, 1)])
    prob = StaticProblem(
        R=np.zeros((2, 1, 1)), p=np.zeros((2, 1)), graph=graph, beta=1.5, gamma=0.0
    )
    w = np.array([[1.0], [0.0]])
    assert objective(prob, w) == pytest.approx(2.0 * 1.5)


def test_smooth_gradient_matches_finite_differences():
    prob = _random_problem(51)
    rng = np.random.default_rng(52)
    w = rng.standard_normal(prob.p.shape)
    grad = smooth_gradient(prob, w)
    eps = 1e-6
    smooth = lambda x: objective(prob, x) - prob.gamma * np.abs(x).sum()
    for _ in range(10):
        n = int(rng.integers(prob.p.shape[0]))
        j = int(rng.integers(prob.p.shape[1]))
        d = np.zeros_like(w)
        d[n, j] = eps
        fd = (smooth(w + d) - smooth(w - d)) / (2 * eps)
        assert grad[n, j] == pytest.approx(fd, abs=1e-4)


def test_unregularized_solution_is_per_node_closed_form():
    prob = _random_problem(53, beta=0.0, gamma=0.0)
    sol = solve(prob, tol=1e-12, max_iter=200_000)
    closed = np.stack([np.linalg.solve(prob.R[n], prob.p[n]) for n in range(5)])
    assert np.max(np.abs(sol.w - closed)) < 1e-8


def test_solution_carries_small_residual_and_flag():
    prob = _random_problem(54)
    sol = solve(prob, tol=1e-9, max_iter=200_000)
    assert sol.converged
    assert sol.residual < 1e-8
    assert optimality_residual(prob, sol.w) == pytest.approx(sol.residual)
    # any perturbation sits at a visibly worse certificate and objective
    worse = sol.w + 0.01
    assert optimality_residual(prob, worse) > 100 * sol.residual
    assert objective(prob, worse) > sol.objective


def test_budget_exhaustion_returns_best_iterate():
    prob = _random_problem(55)
    sol = solve(prob, tol=1e-14, max_iter=3)
    assert not sol.converged
    assert sol.n_iter == 3
    assert np.isfinite(sol.residual)


def test_warm_start_from_solution_converges_immediately():
    prob = _random_problem(56)
    sol = solve(prob, tol=1e-9, max_iter=200_000)
    again = solve(prob, tol=1e-8, max_iter=200_000, w0=sol.w)
    assert again.converged
    assert again.n_iter <= 1


def test_gradient_is_lipschitz_within_bound():
    prob = _random_problem(57)
    L = lipschitz_bound(prob)
    rng = np.random.default_rng(58)
    for _ in range(20):
        a = rng.standard_normal(prob.p.shape)
        b = rng.standard_normal(prob.p.shape)
        lhs = np.linalg.norm(smooth_gradient(prob, a) - smooth_gradient(prob, b))
        assert lhs <= L * np.linalg.norm(a - b) + 1e-9


def test_problem_from_rls_stacks_statistics():
    graph = build_graph(2, [(0, 1)])
    rng = np.random.default_rng(59)
    states = [init_rls_state(3, 0.9) for _ in range(2)]
    for _ in range(5):
        for s in states:
            update_statistics(s, rng.random(3), float(rng.random()))
    prob = problem_from_rls(graph, states, beta=1.0, gamma=0.5)
    assert np.array_equal(prob.R[0], states[0].R)
    assert np.array_equal(prob.R[1], states[1].R)
    assert np.array_equal(prob.p[1], states[1].p)
    assert prob.beta == 1.0 and prob.gamma == 0.5


def test_solution_zeros_are_genuine_for_strong_shrinkage():
    prob = _random_problem(60, gamma=8.0)
    sol = solve(prob, tol=1e-10, max_iter=200_000)
    assert np.any(sol.w == 0.0)
    assert sol.residual < 1e-8
