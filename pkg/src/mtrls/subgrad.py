"""Online subgradient solver for networked sparse recursive least squares.

A cheaper alternative to the ADMM scheme: each node takes one fixed
step along the negative subgradient of its local cost (data misfit,
pull toward the last exchanged neighbor sum, and the sparsity term),
then exchanges estimates once.  Per-step cost is a single matrix-vector
product per node; the price is slower convergence and a steady-state
error floor governed by the step size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mtrls.errors import DimensionMismatchError
from mtrls.graph import Graph
from mtrls.rls import NodeRlsState, update_statistics


@dataclass(frozen=True)
class SubgradParams:
    """Solver constants: step size plus the shared problem weights."""

    alpha: float
    lam: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lam must be in (0, 1], got {self.lam}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")


@dataclass
class SubgradState:
    """Estimates and last exchanged neighbor sums, one row per node."""

    w: np.ndarray
    w_bar: np.ndarray


def init_subgrad_state(n_nodes: int, dim: int) -> SubgradState:
    """All-zero start."""
    return SubgradState(w=np.zeros((n_nodes, dim)), w_bar=np.zeros((n_nodes, dim)))


def sgn(x: np.ndarray) -> np.ndarray:
    """Elementwise sign with sgn(0) = 0, the subgradient choice at zero."""
    return np.sign(x)


def subgrad_step(
    graph: Graph,
    rls_states: list[NodeRlsState],
    st: SubgradState,
    params: SubgradParams,
    inputs: np.ndarray,
    outputs: np.ndarray,
) -> SubgradState:
    """Advance every node by one measurement.

    Statistics are refreshed first, then each node moves against the
    subgradient of the full weighted cost evaluated at its previous
    estimate and previous neighbor sum:

        w_n <- w_n - alpha * (2 R_n w_n - 2 p_n
                              + 4 beta (deg_n w_n - w_bar_n)
                              + gamma sgn(w_n))

    A single exchange then rebuilds the neighbor sums from the new
    estimates.  Mutates ``st`` in place and returns it.
    """
    inputs = np.asarray(inputs, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    if inputs.shape[0] != graph.n_nodes or outputs.shape[0] != graph.n_nodes:
        raise DimensionMismatchError(
            f"expected one measurement per node, got {inputs.shape} and {outputs.shape}"
        )
    if rls_states[0].lam != params.lam:
        raise ValueError(
            f"forgetting factor mismatch: rls {rls_states[0].lam} vs params {params.lam}"
        )
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    w_new = np.empty_like(st.w)
    for n in range(graph.n_nodes):
        rls = update_statistics(rls_states[n], inputs[n], float(outputs[n]))
        grad = 2.0 * (rls.R @ st.w[n]) - 2.0 * rls.p
        grad += 4.0 * beta * (graph.degree(n) * st.w[n] - st.w_bar[n])
        grad += gamma * sgn(st.w[n])
        w_new[n] = st.w[n] - alpha * grad
    st.w = w_new
    st.w_bar = graph.neighbor_sum(w_new)
    return st
