"""Per-node recursive least squares statistics.

Each node maintains exponentially weighted second-order statistics of
its own measurement stream: the input autocorrelation matrix R and
the input-output cross-correlation vector p.  The ADMM solver also
needs F = (2R + c I)^{-1} for a degree-dependent constant c; F is
obtained by a positive definite factorization solve, with a cheap
rank-one recursion available when the forgetting factor is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from mtrls.errors import DimensionMismatchError, LambdaNotOneError, SingularBlockError


@dataclass
class NodeRlsState:
    """Streaming statistics of one node.

    Attributes:
        R: (dim, dim) exponentially weighted input autocorrelation.
        p: (dim,) exponentially weighted input-output cross-correlation.
        lam: forgetting factor in (0, 1].
        last_time: number of updates applied so far.
        F: cached (2R + cI)^{-1} or None; valid for the step it was
            computed at.  Refreshed by compute_F or rank_one_F_update.
    """

    R: np.ndarray
    p: np.ndarray
    lam: float
    last_time: int = 0
    F: np.ndarray | None = field(default=None, repr=False)


def init_rls_state(dim: int, lam: float) -> NodeRlsState:
    """Zero-initialized statistics, as used at stream start."""
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"forgetting factor must be in (0, 1], got {lam}")
    return NodeRlsState(R=np.zeros((dim, dim)), p=np.zeros(dim), lam=lam)


def update_statistics(state: NodeRlsState, u: np.ndarray, d: float) -> NodeRlsState:
    """Fold one measurement into the weighted statistics.

    R <- lam * R + u u^T,  p <- lam * p + d u.  Updates in place and
    returns the state.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != state.p.shape:
        raise DimensionMismatchError(f"input shape {u.shape} != state dim {state.p.shape}")
    state.R *= state.lam
    state.R += np.outer(u, u)
    state.p *= state.lam
    state.p += d * u
    state.last_time += 1
    return state


def regularizer_constant(beta: float, rho: float, degree: int) -> float:
    """Diagonal loading added to 2R in the local ADMM solve."""
    return rho + 2.0 * beta * rho * degree / (2.0 * beta + rho)


def compute_F(state: NodeRlsState, beta: float, rho: float, degree: int) -> np.ndarray:
    """Solve for F = (2R + cI)^{-1} with c = rho + 2*beta*rho*degree/(2*beta+rho).

    Uses a Cholesky factorization; the system matrix is positive
    definite whenever rho > 0 since R is positive semidefinite.  The
    result is cached on the state and returned.
    """
    c = regularizer_constant(beta, rho, degree)
    dim = state.p.shape[0]
    g = 2.0 * state.R + c * np.eye(dim)
    try:
        factor = cho_factor(g, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"local system not positive definite: {exc}") from exc
    f = cho_solve(factor, np.eye(dim))
    state.F = f
    return f


def rank_one_F_update(state: NodeRlsState, u: np.ndarray) -> np.ndarray:
    """Advance the cached F by one measurement when lam == 1.

    With unit forgetting, folding u into R changes F^{-1} by +2 u u^T,
    so the new inverse follows from a rank-one correction:

        F <- F - (F u)(F u)^T / (1/2 + u^T F u)

    Raises:
        LambdaNotOneError: the state's forgetting factor is not 1.
        ValueError: no cached F to advance; call compute_F first.
    """
    if state.lam != 1.0:
        raise LambdaNotOneError(
            f"rank-one inverse update needs lam == 1, state has lam={state.lam}"
        )
    if state.F is None:
        raise ValueError("no cached F; call compute_F before rank_one_F_update")
    u = np.asarray(u, dtype=float)
    fu = state.F @ u
    denom = 0.5 + float(u @ fu)
    f = state.F - np.outer(fu, fu) / denom
    state.F = f
    return f


def block_inverse(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Invert the 2x2 block matrix [[A, B], [C, D]] via the Schur complement.

    Returns the four blocks (TL, TR, BL, BR) of the inverse:

        TL = (A - B D^{-1} C)^{-1}
        TR = -TL B D^{-1}
        BL = -D^{-1} C TL
        BR = D^{-1} + D^{-1} C TL B D^{-1}

    Raises:
        SingularBlockError: D or the Schur complement is singular.
        DimensionMismatchError: block shapes are inconsistent.
    """
    a, b, c, d = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (a, b, c, d))
    ka, kb = a.shape[0], d.shape[0]
    if a.shape != (ka, ka) or d.shape != (kb, kb) or b.shape != (ka, kb) or c.shape != (kb, ka):
        raise DimensionMismatchError(
            f"inconsistent block shapes {a.shape}, {b.shape}, {c.shape}, {d.shape}"
        )
    eye_d = np.eye(kb)
    try:
        d_inv = np.linalg.solve(d, eye_d)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"lower-right block is singular: {exc}") from exc
    schur = a - b @ d_inv @ c
    try:
        tl = np.linalg.solve(schur, np.eye(ka))
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"Schur complement is singular: {exc}") from exc
    tr = -tl @ b @ d_inv
    bl = -d_inv @ c @ tl
    br = d_inv + d_inv @ c @ tl @ b @ d_inv
    return tl, tr, bl, br
