"""Steady-state error analysis for the subgradient scheme.

Treats the mean update as a linear time-invariant recursion on the
stacked estimation errors of all nodes and bounds its limiting norm.
The recursion matrix is built from the expected per-node input
correlations scaled by the forgetting horizon, the node degrees, and
the coupling topology; the bound holds when the recursion is a
contraction and the statistics are rich enough to dominate any
imbalance between node degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mtrls.graph import Graph


def uniform_input_correlation(dim: int) -> np.ndarray:
    """Expected u u^T for inputs with i.i.d. Uniform[0, 1] entries.

    Second moments: E[u_i^2] = 1/3 on the diagonal, E[u_i u_j] = 1/4
    off it, i.e. (1/12) I + (1/4) ones.
    """
    return np.eye(dim) / 12.0 + np.full((dim, dim), 0.25)


def _stack_R(R_list) -> np.ndarray:
    arr = np.asarray(R_list, dtype=float)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected (n_nodes, dim, dim) correlations, got {arr.shape}")
    return arr


def check_assumption4(graph: Graph, R_list, beta: float, lam: float) -> tuple[float, bool]:
    """Excitation margin against degree imbalance.

    Computes

        margin = (2 / (1 - lam)) * min_n eigmin(R_n)
                 - 4 * beta * (degmax - degmin)

    The steady-state analysis needs margin > 0: the weakest node's
    excitation, amplified by the forgetting horizon, must outweigh the
    spread between the best and worst connected nodes.  On graphs with
    equal degrees everywhere the second term vanishes, so any positive
    definite correlation passes.

    Returns:
        (margin, margin > 0)
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"forgetting factor must be in (0, 1) here, got {lam}")
    arr = _stack_R(R_list)
    eig_min = min(float(np.linalg.eigvalsh(arr[n])[0]) for n in range(arr.shape[0]))
    degrees = graph.degrees
    margin = (2.0 / (1.0 - lam)) * eig_min - 4.0 * beta * float(degrees.max() - degrees.min())
    return margin, margin > 0.0


@dataclass(frozen=True)
class ErrorBoundReport:
    """Everything the steady-state bound evaluation produced.

    Attributes:
        phi: block-diagonal curvature matrix of the mean recursion.
        c: coupling matrix (adjacency expanded over coordinates).
        delta_min, delta_max: extreme eigenvalues of phi - 4*beta*c.
        sigma_norm: contraction factor, max |1 - alpha * delta|.
        assumption4_margin: excitation margin (see check_assumption4).
        assumption4_ok: margin positive.
        assumption5_ok: step size below 2 / delta_max.
        bound: limiting bound on the norm of the stacked mean error,
            or None when sigma_norm >= 1 (recursion not contractive,
            bound undefined).
    """

    phi: np.ndarray
    c: np.ndarray
    delta_min: float
    delta_max: float
    sigma_norm: float
    assumption4_margin: float
    assumption4_ok: bool
    assumption5_ok: bool
    bound: float | None

    def to_dict(self, include_matrices: bool = False) -> dict:
        """JSON-ready summary; the large matrices are opt-in."""
        out = {
            "delta_min": self.delta_min,
            "delta_max": self.delta_max,
            "sigma_norm": self.sigma_norm,
            "assumption4_margin": self.assumption4_margin,
            "assumption4_ok": self.assumption4_ok,
            "assumption5_ok": self.assumption5_ok,
            "bound": self.bound,
            "stacked_dim": int(self.phi.shape[0]),
        }
        if include_matrices:
            out["phi"] = self.phi.tolist()
            out["c"] = self.c.tolist()
        return out


def compute_bound(
    graph: Graph,
    R_list,
    w_true: np.ndarray,
    alpha: float,
    beta: float,
    gamma: float,
    lam: float,
) -> ErrorBoundReport:
    """Evaluate the steady-state mean-error bound for the subgradient scheme.

    The mean error recursion contracts at rate sigma_norm, the largest
    |1 - alpha * delta| over the eigenvalues delta of phi - 4*beta*c,
    where phi stacks 4*beta*deg_n I + 2 R_n / (1 - lam) per node and c
    couples neighbors.  When contractive, the limiting mean error norm
    is at most

        sqrt(N) * alpha / (1 - sigma_norm)
            * (8 * beta * degmax * max_n ||w_true_n|| + gamma * sqrt(dim))

    Args:
        R_list: per-node expected input correlations, (n_nodes, dim, dim).
        w_true: per-node true vectors, (n_nodes, dim).
        alpha: subgradient step size.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"forgetting factor must be in (0, 1) here, got {lam}")
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    arr = _stack_R(R_list)
    n, m = arr.shape[0], arr.shape[1]
    w_true = np.asarray(w_true, dtype=float)
    degrees = graph.degrees
    blocks = [4.0 * beta * degrees[i] * np.eye(m) + 2.0 * arr[i] / (1.0 - lam) for i in range(n)]
    phi = np.zeros((n * m, n * m))
    for i, blk in enumerate(blocks):
        phi[i * m : (i + 1) * m, i * m : (i + 1) * m] = blk
    c = np.kron(graph.adjacency_matrix(), np.eye(m))
    deltas = np.linalg.eigvalsh(phi - 4.0 * beta * c)
    delta_min, delta_max = float(deltas[0]), float(deltas[-1])
    sigma_norm = float(np.max(np.abs(1.0 - alpha * deltas)))
    margin, a4_ok = check_assumption4(graph, arr, beta, lam)
    a5_ok = delta_max > 0.0 and alpha < 2.0 / delta_max
    if sigma_norm < 1.0:
        deg_max = float(degrees.max()) if n else 0.0
        w_norm_max = float(np.max(np.linalg.norm(w_true, axis=1)))
        bound = (
            np.sqrt(n)
            * alpha
            / (1.0 - sigma_norm)
            * (8.0 * beta * deg_max * w_norm_max + gamma * np.sqrt(m))
        )
        bound_val: float | None = float(bound)
    else:
        bound_val = None
    return ErrorBoundReport(
        phi=phi,
        c=c,
        delta_min=delta_min,
        delta_max=delta_max,
        sigma_norm=sigma_norm,
        assumption4_margin=margin,
        assumption4_ok=a4_ok,
        assumption5_ok=a5_ok,
        bound=bound_val,
    )
