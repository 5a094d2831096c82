"""Online ADMM solver for networked sparse recursive least squares.

Every node refines a sparse weight estimate from its private stream
while a pairwise penalty keeps neighboring estimates similar.  The
consensus coupling is handled by giving each node a local copy of
every neighbor's estimate; one ADMM pass per measurement then splits
into a closed-form local solve, a soft-threshold shrinkage, and dual
ascent, with two neighbor exchanges per step.

Two equivalent realizations are provided.  The production path stores
only per-node aggregates of the neighbor copies and their duals, so
per-node memory is one matrix plus a fixed number of vectors no matter
how many neighbors a node has.  The reference path keeps every
neighbor copy and dual explicitly; it exists to validate the
aggregated algebra and as a readable statement of the update scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mtrls.errors import DimensionMismatchError
from mtrls.graph import Graph
from mtrls.rls import NodeRlsState, compute_F, rank_one_F_update, update_statistics


@dataclass(frozen=True)
class AdmmParams:
    """Problem and solver constants.

    Attributes:
        lam: forgetting factor in (0, 1].
        beta: neighbor-similarity penalty weight, >= 0.
        gamma: sparsity penalty weight, >= 0.
        rho: augmented-Lagrangian penalty, > 0.
    """

    lam: float
    beta: float
    gamma: float
    rho: float

    def __post_init__(self) -> None:
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lam must be in (0, 1], got {self.lam}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.rho <= 0.0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    @property
    def mix(self) -> float:
        """Coupling coefficient 2*beta / (2*beta + rho)."""
        return 2.0 * self.beta / (2.0 * self.beta + self.rho)


@dataclass
class AdmmState:
    """Solver state for all nodes, one row per node.

    Persistent across steps:
        w: current estimates.
        w_bar: neighbor sums of w from the last exchange.
        y: duals tying each node's local solve to its estimate.
        z_under: per-node sum of the duals the node holds for its own
            copies of its neighbors.
        z_over: per-node sum of the duals its neighbors hold for their
            copies of this node.

    Transients overwritten by each step (kept for inspection):
        x: local least squares proposals.
        v_under: sum of each node's own neighbor copies.
        v_over: sum of the copies of this node held by its neighbors.
        eta, theta: the two solve components the proposal splits into.
        eta_bar, theta_bar: neighbor sums of eta and theta.
    """

    w: np.ndarray
    w_bar: np.ndarray
    y: np.ndarray
    z_under: np.ndarray
    z_over: np.ndarray
    x: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    v_under: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    v_over: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    eta: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    theta: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    eta_bar: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    theta_bar: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


def init_admm_state(n_nodes: int, dim: int) -> AdmmState:
    """All-zero solver state, the standard cold start."""
    zeros = lambda: np.zeros((n_nodes, dim))
    return AdmmState(w=zeros(), w_bar=zeros(), y=zeros(), z_under=zeros(), z_over=zeros())


def soft_threshold(a: np.ndarray, kappa) -> np.ndarray:
    """Shrink toward zero: sign(a) * max(|a| - kappa, 0), elementwise.

    This is the proximal map of kappa * |.|, so it solves
    min_x kappa*|x| + (1/2)(x - a)^2 coordinatewise.  kappa may be a
    scalar or broadcast against ``a``; kappa = 0 is the identity.
    """
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0)


def compute_eta_theta(
    node: int, rls: NodeRlsState, st: AdmmState, params: AdmmParams
) -> tuple[np.ndarray, np.ndarray]:
    """Split node's local solve into its data term and coupling term.

    eta = F (2p - y + rho*w) carries the node's own data and dual;
    theta = F (-z_under + rho*w_bar) carries the pull toward the
    neighborhood.  Requires a current F on the rls state.
    """
    if rls.F is None:
        raise ValueError("rls state has no cached F; call compute_F first")
    rho = params.rho
    eta = rls.F @ (2.0 * rls.p - st.y[node] + rho * st.w[node])
    theta = rls.F @ (-st.z_under[node] + rho * st.w_bar[node])
    return eta, theta


def _refresh_factors(
    graph: Graph,
    rls_states: list[NodeRlsState],
    params: AdmmParams,
    new_inputs: np.ndarray | None = None,
) -> None:
    """Bring every node's cached F up to date with its statistics.

    For lam < 1 the factorization is redone from R each step.  For
    lam == 1 an existing cache is advanced by the rank-one recursion
    using the inputs that were just folded in.
    """
    for n, rls in enumerate(rls_states):
        if params.lam == 1.0 and rls.F is not None and new_inputs is not None:
            rank_one_F_update(rls, new_inputs[n])
        else:
            compute_F(rls, params.beta, params.rho, graph.degree(n))


def admm_iteration(
    graph: Graph, rls_states: list[NodeRlsState], st: AdmmState, params: AdmmParams
) -> AdmmState:
    """One ADMM pass over the network at the current statistics.

    Phases, each completing across all nodes before the next begins:
    local solve components (eta, theta), first exchange, proposal and
    copy aggregates (x, v_under, v_over), shrinkage to the new
    estimates, second exchange, dual ascent.  Every node's cached F
    must be current.  Mutates ``st`` in place and returns it.
    """
    n_nodes, _ = st.w.shape
    rho, gamma = params.rho, params.gamma
    mix = params.mix
    total = 2.0 * params.beta + rho
    deg = graph.degrees.astype(float)[:, None]

    eta = np.empty_like(st.w)
    theta = np.empty_like(st.w)
    for n in range(n_nodes):
        eta[n], theta[n] = compute_eta_theta(n, rls_states[n], st, params)

    # first exchange: each node learns its neighbors' solve components
    eta_bar = graph.neighbor_sum(eta)
    theta_bar = graph.neighbor_sum(theta)

    x = eta + mix * theta
    v_under = mix * deg * eta + mix * mix * deg * theta + (-st.z_under + rho * st.w_bar) / total
    v_over = mix * eta_bar + mix * mix * theta_bar + (-st.z_over + rho * deg * st.w) / total

    scale = rho * (1.0 + deg)
    w_new = soft_threshold((st.y + rho * x + st.z_over + rho * v_over) / scale, gamma / scale)

    # second exchange: neighbor sums of the new estimates
    w_bar_new = graph.neighbor_sum(w_new)

    st.y = st.y + rho * (x - w_new)
    st.z_under = st.z_under + rho * (v_under - w_bar_new)
    st.z_over = st.z_over + rho * (v_over - deg * w_new)
    st.w = w_new
    st.w_bar = w_bar_new
    st.x, st.v_under, st.v_over = x, v_under, v_over
    st.eta, st.theta, st.eta_bar, st.theta_bar = eta, theta, eta_bar, theta_bar
    return st


def admm_step(
    graph: Graph,
    rls_states: list[NodeRlsState],
    st: AdmmState,
    params: AdmmParams,
    inputs: np.ndarray,
    outputs: np.ndarray,
) -> AdmmState:
    """Advance every node by one measurement: statistics, F, one ADMM pass.

    Args:
        inputs: (n_nodes, dim) input vectors, one row per node.
        outputs: (n_nodes,) scalar observations.
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
    for n in range(graph.n_nodes):
        update_statistics(rls_states[n], inputs[n], float(outputs[n]))
    _refresh_factors(graph, rls_states, params, new_inputs=inputs)
    return admm_iteration(graph, rls_states, st, params)


# ---------------------------------------------------------------------------
# reference realization with explicit neighbor copies
# ---------------------------------------------------------------------------


@dataclass
class AdmmReferenceState:
    """Explicit per-copy state: node n holds one copy and one dual per neighbor.

    v[n][i] and z[n][i] belong to node n's copy of its i-th neighbor
    (ascending order).  Kept for validation of the aggregated path.
    """

    w: np.ndarray
    y: np.ndarray
    v: list[np.ndarray]
    z: list[np.ndarray]
    x: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


def init_reference_state(graph: Graph, dim: int) -> AdmmReferenceState:
    n = graph.n_nodes
    return AdmmReferenceState(
        w=np.zeros((n, dim)),
        y=np.zeros((n, dim)),
        v=[np.zeros((graph.degree(i), dim)) for i in range(n)],
        z=[np.zeros((graph.degree(i), dim)) for i in range(n)],
    )


def _incoming_slots(graph: Graph) -> list[list[tuple[int, int]]]:
    """For each node n, the (m, i) pairs with m's i-th neighbor equal to n."""
    incoming: list[list[tuple[int, int]]] = [[] for _ in range(graph.n_nodes)]
    for m in range(graph.n_nodes):
        for i, tgt in enumerate(graph.neighbors[m]):
            incoming[tgt].append((m, i))
    return incoming


def admm_iteration_reference(
    graph: Graph,
    rls_states: list[NodeRlsState],
    st: AdmmReferenceState,
    params: AdmmParams,
) -> AdmmReferenceState:
    """One ADMM pass keeping every neighbor copy and dual explicit.

    Same phase structure and fixed point as admm_iteration; the copy
    updates here are the per-copy closed forms whose neighbor sums the
    aggregated path maintains directly.
    """
    n_nodes, _ = st.w.shape
    rho, gamma = params.rho, params.gamma
    mix = params.mix
    total = 2.0 * params.beta + rho

    x = np.empty_like(st.w)
    v_new: list[np.ndarray] = []
    for n in range(n_nodes):
        f = rls_states[n].F
        if f is None:
            raise ValueError("rls state has no cached F; call compute_F first")
        b1 = 2.0 * rls_states[n].p - st.y[n] + rho * st.w[n]
        nbrs = graph.neighbors[n]
        if nbrs:
            b2 = np.stack([-st.z[n][i] + rho * st.w[m] for i, m in enumerate(nbrs)])
            fb2_sum = f @ b2.sum(axis=0)
        else:
            b2 = np.zeros((0, b1.shape[0]))
            fb2_sum = np.zeros_like(b1)
        fb1 = f @ b1
        x[n] = fb1 + mix * fb2_sum
        v_new.append(mix * fb1 + b2 / total + mix * mix * fb2_sum)

    incoming = _incoming_slots(graph)
    w_new = np.empty_like(st.w)
    for n in range(n_nodes):
        deg = graph.degree(n)
        scale = rho * (1.0 + deg)
        pull = st.y[n] + rho * x[n]
        for m, i in incoming[n]:
            pull = pull + st.z[m][i] + rho * v_new[m][i]
        w_new[n] = soft_threshold(pull / scale, gamma / scale)

    for n in range(n_nodes):
        st.y[n] += rho * (x[n] - w_new[n])
        for i, m in enumerate(graph.neighbors[n]):
            st.z[n][i] += rho * (v_new[n][i] - w_new[m])
    st.w = w_new
    st.v = v_new
    st.x = x
    return st


def admm_step_reference(
    graph: Graph,
    rls_states: list[NodeRlsState],
    st: AdmmReferenceState,
    params: AdmmParams,
    inputs: np.ndarray,
    outputs: np.ndarray,
) -> AdmmReferenceState:
    """Reference counterpart of admm_step."""
    inputs = np.asarray(inputs, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    for n in range(graph.n_nodes):
        update_statistics(rls_states[n], inputs[n], float(outputs[n]))
    _refresh_factors(graph, rls_states, params, new_inputs=inputs)
    return admm_iteration_reference(graph, rls_states, st, params)


def reference_aggregates(
    graph: Graph, st: AdmmReferenceState
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Neighbor-copy sums (v_under, v_over, z_under, z_over) of a reference state."""
    n_nodes, dim = st.w.shape
    v_under = np.zeros((n_nodes, dim))
    v_over = np.zeros((n_nodes, dim))
    z_under = np.zeros((n_nodes, dim))
    z_over = np.zeros((n_nodes, dim))
    for n in range(n_nodes):
        if graph.degree(n):
            v_under[n] = st.v[n].sum(axis=0)
            z_under[n] = st.z[n].sum(axis=0)
    for n, pairs in enumerate(_incoming_slots(graph)):
        for m, i in pairs:
            v_over[n] += st.v[m][i]
            z_over[n] += st.z[m][i]
    return v_under, v_over, z_under, z_over
