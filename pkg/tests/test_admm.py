"""Consensus solver: both realizations, shrinkage, invariants, convergence."""

import copy

import numpy as np
import pytest

from mtrls.admm import (
    AdmmParams,
    admm_iteration,
    admm_step,
    admm_step_reference,
    init_admm_state,
    init_reference_state,
    reference_aggregates,
    soft_threshold,
)
from mtrls.errors import DimensionMismatchError
from mtrls.graph import build_graph, random_graph
from mtrls.oracle import StaticProblem, solve
from mtrls.rls import compute_F, init_rls_state, update_statistics


def _run_pair(graph, params, steps, seed):
    """Advance both realizations on one shared stream."""
    rng = np.random.default_rng(seed)
    n, m = graph.n_nodes, 4
    rls_a = [init_rls_state(m, params.lam) for _ in range(n)]
    rls_b = [init_rls_state(m, params.lam) for _ in range(n)]
    st_a = init_admm_state(n, m)
    st_b = init_reference_state(graph, m)
    worst = 0.0
    for _ in range(steps):
        u = rng.random((n, m))
        d = rng.random(n)
        admm_step(graph, rls_a, st_a, params, u, d)
        admm_step_reference(graph, rls_b, st_b, params, u, d)
        worst = max(worst, float(np.max(np.abs(st_a.w - st_b.w))))
    return st_a, st_b, worst


def test_params_validation():
    with pytest.raises(ValueError):
        AdmmParams(lam=0.0, beta=1.0, gamma=1.0, rho=1.0)
    with pytest.raises(ValueError):
        AdmmParams(lam=1.2, beta=1.0, gamma=1.0, rho=1.0)
    with pytest.raises(ValueError):
        AdmmParams(lam=0.9, beta=-0.1, gamma=1.0, rho=1.0)
    with pytest.raises(ValueError):
        AdmmParams(lam=0.9, beta=1.0, gamma=-1.0, rho=1.0)
    with pytest.raises(ValueError):
        AdmmParams(lam=0.9, beta=1.0, gamma=1.0, rho=0.0)


def test_mix_hand_value():
    assert AdmmParams(lam=0.9, beta=1.0, gamma=0.0, rho=1.0).mix == pytest.approx(2.0 / 3.0)


def test_soft_threshold_hand_values():
    assert soft_threshold(np.array(5.0), 1.0) == pytest.approx(4.0)
    assert soft_threshold(np.array(-5.0), 1.0) == pytest.approx(-4.0)
    assert soft_threshold(np.array(0.3), 1.0) == 0.0
    assert soft_threshold(np.array(-0.3), 1.0) == 0.0
    got = soft_threshold(np.array([2.0, -0.5, 0.0, -3.0]), 1.5)
    assert np.array_equal(got, [0.5, 0.0, 0.0, -1.5])


def test_soft_threshold_zero_kappa_is_identity():
    a = np.array([1.0, -2.0, 0.25])
    assert np.array_equal(soft_threshold(a, 0.0), a)


def test_soft_threshold_solves_scalar_prox():
    rng = np.random.default_rng(31)
    for _ in range(60):
        gam, rho, v = rng.uniform(0.05, 3.0), rng.uniform(0.1, 3.0), rng.uniform(-4.0, 4.0)
        x = float(soft_threshold(np.array(v), gam / rho))
        grid = np.arange(v - 3.0, v + 3.0, 1e-3)
        obj = lambda t: gam * np.abs(t) + 0.5 * rho * (t - v) ** 2
        assert obj(x) <= obj(grid).min() + 1e-12


def test_realizations_agree_on_random_streams():
    params = AdmmParams(lam=0.97, beta=0.8, gamma=0.6, rho=1.4)
    graph = random_graph(8, 12, seed=17)
    _, _, worst = _run_pair(graph, params, steps=40, seed=18)
    assert worst < 1e-10


def test_realizations_agree_with_unit_forgetting():
    params = AdmmParams(lam=1.0, beta=1.0, gamma=0.3, rho=1.0)
    graph = random_graph(5, 6, seed=19)
    _, _, worst = _run_pair(graph, params, steps=30, seed=20)
    assert worst < 1e-10


def test_realizations_agree_with_isolated_node():
    params = AdmmParams(lam=0.95, beta=1.0, gamma=0.5, rho=1.0)
    graph = build_graph(3, [(0, 1)])
    st_a, st_b, worst = _run_pair(graph, params, steps=25, seed=21)
    assert worst < 1e-10
    assert np.all(np.isfinite(st_a.w))


def test_aggregated_copies_match_reference_sums():
    params = AdmmParams(lam=0.96, beta=1.1, gamma=0.4, rho=0.9)
    graph = random_graph(6, 9, seed=22)
    st_a, st_b, _ = _run_pair(graph, params, steps=30, seed=23)
    v_under, v_over, z_under, z_over = reference_aggregates(graph, st_b)
    for mine, ref in (
        (st_a.v_under, v_under),
        (st_a.v_over, v_over),
        (st_a.z_under, z_under),
        (st_a.z_over, z_over),
    ):
        assert np.max(np.abs(mine - ref)) < 1e-10


def test_dual_sums_balance():
    # summed lower duals equal summed upper duals for all time
    params = AdmmParams(lam=0.95, beta=0.7, gamma=0.9, rho=1.2)
    graph = random_graph(7, 10, seed=24)
    rng = np.random.default_rng(25)
    rls = [init_rls_state(3, params.lam) for _ in range(7)]
    st = init_admm_state(7, 3)
    for _ in range(25):
        admm_step(graph, rls, st, params, rng.random((7, 3)), rng.random(7))
        gap = np.max(np.abs(st.z_under.sum(axis=0) - st.z_over.sum(axis=0)))
        assert gap < 1e-10


def test_proposals_collapse_to_estimates_at_large_rho():
    graph = random_graph(5, 7, seed=26)
    rng = np.random.default_rng(27)
    warm = AdmmParams(lam=0.95, beta=1.0, gamma=0.5, rho=1.0)
    rls = [init_rls_state(3, warm.lam) for _ in range(5)]
    st = init_admm_state(5, 3)
    for _ in range(10):
        admm_step(graph, rls, st, warm, rng.random((5, 3)), rng.random(5))
    gaps = []
    for rho in (1.0, 1e3, 1e6):
        params = AdmmParams(lam=0.95, beta=1.0, gamma=0.5, rho=rho)
        trial_rls = copy.deepcopy(rls)
        trial_st = copy.deepcopy(st)
        for node in range(5):
            compute_F(trial_rls[node], params.beta, params.rho, graph.degree(node))
        w_before = trial_st.w.copy()
        admm_iteration(graph, trial_rls, trial_st, params)
        gaps.append(float(np.max(np.abs(trial_st.x - w_before))))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-4


def test_frozen_statistics_reach_benchmark():
    rng = np.random.default_rng(28)
    graph = build_graph(4, [(0, 1), (1, 2), (2, 3)])
    m = 3
    params = AdmmParams(lam=0.99, beta=1.0, gamma=0.4, rho=1.0)
    rls = [init_rls_state(m, params.lam) for _ in range(4)]
    for _ in range(120):
        u = rng.random((4, m))
        d = rng.random(4)
        for n in range(4):
            update_statistics(rls[n], u[n], float(d[n]))
    problem = StaticProblem(
        R=np.stack([s.R for s in rls]),
        p=np.stack([s.p for s in rls]),
        graph=graph,
        beta=params.beta,
        gamma=params.gamma,
    )
    target = solve(problem, tol=1e-12, max_iter=200_000).w
    st = init_admm_state(4, m)
    for n in range(4):
        compute_F(rls[n], params.beta, params.rho, graph.degree(n))
    for _ in range(1500):
        admm_iteration(graph, rls, st, params)
    gap = np.linalg.norm(st.w - target) / np.linalg.norm(target)
    assert gap < 1e-4


def test_step_rejects_wrong_measurement_count():
    graph = build_graph(3, [(0, 1), (1, 2)])
    params = AdmmParams(lam=0.95, beta=1.0, gamma=1.0, rho=1.0)
    rls = [init_rls_state(2, params.lam) for _ in range(3)]
    st = init_admm_state(3, 2)
    with pytest.raises(DimensionMismatchError):
        admm_step(graph, rls, st, params, np.ones((2, 2)), np.ones(2))


def test_step_rejects_forgetting_mismatch():
    graph = build_graph(2, [(0, 1)])
    params = AdmmParams(lam=0.95, beta=1.0, gamma=1.0, rho=1.0)
    rls = [init_rls_state(2, 0.9) for _ in range(2)]
    st = init_admm_state(2, 2)
    with pytest.raises(ValueError):
        admm_step(graph, rls, st, params, np.ones((2, 2)), np.ones(2))


def test_state_shapes_and_zero_init():
    st = init_admm_state(4, 6)
    for field in (st.w, st.w_bar, st.y, st.z_under, st.z_over):
        assert field.shape == (4, 6)
        assert np.all(field == 0.0)
