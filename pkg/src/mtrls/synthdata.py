"""Synthetic ground truth and measurement streams.

Each node n tracks its own time-varying sparse weight vector.  All
nodes share the same support; the nonzero entries start from the
minimizer of a quadratic similarity problem (so neighboring nodes get
similar but not equal weights) and then drift by small independent
uniform increments.  Measurements are noisy inner products with
uniform random inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mtrls.errors import DimensionMismatchError, InvalidSparsityError
from mtrls.graph import Graph


@dataclass(frozen=True)
class GroundTruth:
    """Weight trajectories for every node.

    Attributes:
        dim: filter length M.
        support: sorted indices of the coordinates allowed to be nonzero.
        weights: array (horizon+1, n_nodes, dim); weights[t, n] is node
            n's true vector at time t.  Off-support entries are exactly
            zero at every time.
        noise_level: upper bound of the additive observation noise.
        drift_level: per-step increment magnitude; each support entry
            moves by at most drift_level / 2 per step.
        zero_mean_noise: if True, noise is uniform on
            [-noise_level/2, +noise_level/2] instead of [0, noise_level].
    """

    dim: int
    support: np.ndarray
    weights: np.ndarray
    noise_level: float
    drift_level: float
    zero_mean_noise: bool = False

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[1]

    @property
    def horizon(self) -> int:
        return self.weights.shape[0] - 1


@dataclass(frozen=True)
class Measurement:
    """One scalar observation at a node: d = u . w_true + e."""

    node: int
    time: int
    input: np.ndarray
    output: float


def initial_similar_weights(graph: Graph, phis: np.ndarray, seed=None) -> np.ndarray:
    """Pull per-node anchor vectors toward their neighbors.

    Returns the minimizer of

        sum_n ||w_n - phi_n||^2  +  1/2 sum_n sum_{m in nbrs(n)} ||w_n - w_m||^2

    which decouples per coordinate into the linear system (I + L) w = phi
    with L the graph Laplacian.  The system matrix is positive definite,
    so the minimizer is unique.

    Args:
        graph: network topology.
        phis: array (n_nodes, k) of anchor vectors.
        seed: accepted for interface stability and ignored; the unique
            minimizer involves no randomness.

    Returns:
        Array (n_nodes, k) of smoothed vectors.
    """
    phis = np.asarray(phis, dtype=float)
    if phis.ndim != 2 or phis.shape[0] != graph.n_nodes:
        raise DimensionMismatchError(
            f"phis must be (n_nodes, k), got {phis.shape} for {graph.n_nodes} nodes"
        )
    system = np.eye(graph.n_nodes) + graph.laplacian_matrix()
    return np.linalg.solve(system, phis)


def generate_ground_truth(
    graph: Graph,
    dim: int,
    n_zeros: int,
    noise_level: float,
    drift_level: float,
    horizon: int,
    seed,
    zero_mean_noise: bool = False,
) -> GroundTruth:
    """Draw a sparse, slowly drifting weight trajectory for every node.

    The support (dim - n_zeros coordinates) is drawn once and shared by
    all nodes.  Initial support values come from anchor vectors uniform
    on [0, 1] smoothed by initial_similar_weights, so neighbors start
    similar.  Each subsequent step adds independent uniform increments
    on [-drift_level/2, +drift_level/2] to every support entry.

    Draw order from the seeded stream is fixed: support, then anchors,
    then all increments, so the trajectory is reproducible.

    Raises:
        InvalidSparsityError: n_zeros outside [0, dim - 1].
    """
    if not 0 <= n_zeros < dim:
        raise InvalidSparsityError(
            f"need 0 <= n_zeros < dim, got n_zeros={n_zeros}, dim={dim}"
        )
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    rng = np.random.default_rng(seed)
    n = graph.n_nodes
    k = dim - n_zeros
    support = np.sort(rng.choice(dim, size=k, replace=False))
    anchors = rng.random((n, k))
    start = initial_similar_weights(graph, anchors)
    steps = drift_level * (rng.random((horizon, n, k)) - 0.5)
    weights = np.zeros((horizon + 1, n, dim))
    weights[0][:, support] = start
    if horizon > 0:
        trajectory = start[None, :, :] + np.cumsum(steps, axis=0)
        weights[1:, :, support] = trajectory
    return GroundTruth(
        dim=dim,
        support=support,
        weights=weights,
        noise_level=float(noise_level),
        drift_level=float(drift_level),
        zero_mean_noise=zero_mean_noise,
    )


def emit_measurement(truth: GroundTruth, node: int, time: int, rng) -> Measurement:
    """Draw one observation for a node at a given time.

    Consumes dim + 1 uniforms from ``rng``: the input vector entries,
    then the noise sample.  Noise is uniform on [0, noise_level], or
    centered at zero when the truth was generated with zero_mean_noise.

    Args:
        truth: ground truth trajectories.
        node: node index.
        time: time index in [1, horizon].
        rng: numpy Generator.
    """
    if not 1 <= time <= truth.horizon:
        raise ValueError(f"time must be in [1, {truth.horizon}], got {time}")
    u = rng.random(truth.dim)
    e = rng.random()
    if truth.zero_mean_noise:
        e = truth.noise_level * (e - 0.5)
    else:
        e = truth.noise_level * e
    d = float(u @ truth.weights[time, node]) + e
    return Measurement(node=node, time=time, input=u, output=d)


def measurement_block(truth: GroundTruth, seed) -> tuple[np.ndarray, np.ndarray]:
    """Generate the full measurement stream for every node.

    Node streams are independent: child stream n is spawned from the
    given seed and consumed in time order exactly as repeated
    emit_measurement calls would consume it (input entries then noise,
    per step).

    Returns:
        (U, D) with U of shape (horizon+1, n_nodes, dim) and D of shape
        (horizon+1, n_nodes).  Row 0 is zero; measurements exist for
        t = 1..horizon.
    """
    n, m, horizon = truth.n_nodes, truth.dim, truth.horizon
    U = np.zeros((horizon + 1, n, m))
    D = np.zeros((horizon + 1, n))
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    children = seed.spawn(n)
    for node in range(n):
        rng = np.random.default_rng(children[node])
        # one uniform block per node, laid out (time, dim + 1): this is
        # bit-identical to drawing u then e step by step from the stream
        block = rng.random((horizon, m + 1))
        U[1:, node, :] = block[:, :m]
        e = block[:, m]
        if truth.zero_mean_noise:
            e = truth.noise_level * (e - 0.5)
        else:
            e = truth.noise_level * e
        # per-row dot products so each output is bitwise what the
        # step-by-step path computes
        for t in range(horizon):
            D[t + 1, node] = float(block[t, :m] @ truth.weights[t + 1, node]) + e[t]
    return U, D
