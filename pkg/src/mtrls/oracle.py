"""Centralized benchmark solver.

Solves the full network objective at frozen statistics to high
accuracy: the sum over nodes of the weighted data misfit, the pairwise
similarity penalty over edges, and the l1 sparsity penalty.  Used as
the reference the online solvers are measured against.  The method is
proximal gradient descent (gradient step on the smooth part, soft
threshold for the l1 part) with a conservative global step size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mtrls.admm import soft_threshold
from mtrls.errors import DimensionMismatchError
from mtrls.graph import Graph
from mtrls.rls import NodeRlsState


@dataclass(frozen=True)
class StaticProblem:
    """Network objective at frozen statistics.

    Attributes:
        R: (n_nodes, dim, dim) per-node input autocorrelations.
        p: (n_nodes, dim) per-node cross-correlations.
        graph: coupling topology.
        beta: similarity penalty weight, >= 0.
        gamma: sparsity penalty weight, >= 0.
        const: optional constant completing the data misfit (the
            weighted sum of squared observations); affects objective
            values only, never the minimizer.
    """

    R: np.ndarray
    p: np.ndarray
    graph: Graph
    beta: float
    gamma: float
    const: float = 0.0

    def __post_init__(self) -> None:
        n, m = self.p.shape
        if self.R.shape != (n, m, m):
            raise DimensionMismatchError(
                f"R shape {self.R.shape} inconsistent with p shape {self.p.shape}"
            )
        if n != self.graph.n_nodes:
            raise DimensionMismatchError(
                f"{n} statistic rows for {self.graph.n_nodes} nodes"
            )
        if self.beta < 0.0 or self.gamma < 0.0:
            raise ValueError("beta and gamma must be nonnegative")


@dataclass(frozen=True)
class OracleSolution:
    """Solver output: minimizer estimate plus diagnostics."""

    w: np.ndarray
    residual: float
    n_iter: int
    converged: bool
    objective: float


def problem_from_rls(
    graph: Graph, rls_states: list[NodeRlsState], beta: float, gamma: float
) -> StaticProblem:
    """Freeze the current statistics of a node collection into a problem."""
    return StaticProblem(
        R=np.stack([s.R for s in rls_states]),
        p=np.stack([s.p for s in rls_states]),
        graph=graph,
        beta=beta,
        gamma=gamma,
    )


def objective(problem: StaticProblem, w: np.ndarray) -> float:
    """Full objective value at estimates ``w`` of shape (n_nodes, dim)."""
    w = np.asarray(w, dtype=float)
    quad = float(np.einsum("ni,nij,nj->", w, problem.R, w) - 2.0 * np.sum(problem.p * w))
    pair = 0.0
    for u_node, v_node in problem.graph.edges:
        diff = w[u_node] - w[v_node]
        pair += float(diff @ diff)
    # each unordered edge appears in both nodes' neighbor sums
    return quad + problem.const + 2.0 * problem.beta * pair + problem.gamma * float(
        np.abs(w).sum()
    )


def smooth_gradient(problem: StaticProblem, w: np.ndarray) -> np.ndarray:
    """Gradient of the differentiable part (data misfit plus similarity)."""
    deg = problem.graph.degrees.astype(float)[:, None]
    return (
        2.0 * np.einsum("nij,nj->ni", problem.R, w)
        - 2.0 * problem.p
        + 4.0 * problem.beta * (deg * w - problem.graph.neighbor_sum(w))
    )


def optimality_residual(problem: StaticProblem, w: np.ndarray, grad: np.ndarray | None = None) -> float:
    """Distance from zero to the objective's subdifferential at ``w``.

    On nonzero coordinates the subdifferential is a point; on zero
    coordinates the sign is chosen to make each component as small as
    possible.  Zero residual certifies a global minimizer.
    """
    if grad is None:
        grad = smooth_gradient(problem, w)
    gamma = problem.gamma
    r = np.where(
        w != 0.0,
        grad + gamma * np.sign(w),
        np.sign(grad) * np.maximum(np.abs(grad) - gamma, 0.0),
    )
    return float(np.linalg.norm(r))


def lipschitz_bound(problem: StaticProblem) -> float:
    """Upper bound on the smooth part's curvature: 2 max eig(R_n) + 8 beta degmax."""
    eig_max = max(float(np.linalg.eigvalsh(problem.R[n])[-1]) for n in range(problem.p.shape[0]))
    deg_max = int(problem.graph.degrees.max()) if problem.graph.n_nodes else 0
    return 2.0 * eig_max + 8.0 * problem.beta * deg_max


def solve(
    problem: StaticProblem,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    w0: np.ndarray | None = None,
) -> OracleSolution:
    """Minimize the frozen objective by proximal gradient descent.

    Iterates w <- shrink(w - grad/L, gamma/L) with L the curvature
    bound, stopping when the optimality residual drops below ``tol``.
    If the iteration budget runs out the best iterate seen is returned
    with converged = False.

    Args:
        tol: target subdifferential residual (Euclidean norm).
        max_iter: iteration budget.
        w0: optional warm start, shape (n_nodes, dim); zeros otherwise.
    """
    n, m = problem.p.shape
    w = np.zeros((n, m)) if w0 is None else np.array(w0, dtype=float)
    lip = lipschitz_bound(problem)
    if lip <= 0.0:
        lip = 1.0
    step = 1.0 / lip
    kappa = problem.gamma * step
    best_w, best_res = w, np.inf
    for it in range(max_iter):
        grad = smooth_gradient(problem, w)
        res = optimality_residual(problem, w, grad)
        if res < best_res:
            best_w, best_res = w, res
        if res < tol:
            return OracleSolution(
                w=w, residual=res, n_iter=it, converged=True, objective=objective(problem, w)
            )
        w = soft_threshold(w - step * grad, kappa)
    return OracleSolution(
        w=best_w,
        residual=best_res,
        n_iter=max_iter,
        converged=False,
        objective=objective(problem, best_w),
    )
