"""Convex nuclear-norm baseline: proximal gradient with optional momentum.

Solves min_X lam * ||X||_* + f(X) with the fixed step 1/L(f).  The proximal
map of the nuclear norm is plain singular value thresholding.  Without
momentum the objective decreases monotonically; with momentum (the standard
accelerated sequence) convergence is faster but not monotone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import SolveReport
from .wsvt import numerical_rank, svd

__all__ = ["ConvexConfig", "solve_convex"]


@dataclass(frozen=True)
class ConvexConfig:
    lam: float
    max_iters: int = 500
    tol: float = 1e-8  # on the step norm
    acceleration: bool = True

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


def solve_convex(loss, config: ConvexConfig, X0=None) -> SolveReport:
    """Minimize lam * ||X||_* + f(X) by (accelerated) proximal gradient."""
    L = loss.lipschitz()
    m, n = loss.shape
    X = np.zeros((m, n)) if X0 is None else np.array(X0, dtype=float)
    if X.shape != (m, n):
        raise ValueError(f"X0 shape {X.shape} does not match loss shape {(m, n)}")

    lam = config.lam
    thresh = lam / L
    Z = X.copy()
    t = 1.0

    obj_trace, rank_trace, step_trace = [], [], []
    termination = "max_iters"
    iterations = 0

    for k in range(config.max_iters):
        point = Z if config.acceleration else X
        _, grad = loss.eval_and_gradient(point)
        dec = svd(point - grad / L)
        s = np.maximum(dec.sigma - thresh, 0.0)
        X_next = (dec.U * s) @ dec.V.T

        step = float(np.linalg.norm(X_next - X))
        obj_trace.append(lam * float(s.sum()) + loss.value(X_next))
        rank_trace.append(numerical_rank(s))
        step_trace.append(step)

        if config.acceleration:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            Z = X_next + ((t - 1.0) / t_next) * (X_next - X)
            t = t_next
        X = X_next
        iterations = k + 1

        if config.tol > 0.0 and step <= config.tol:
            termination = "step"
            break

    return SolveReport(
        final_X=X,
        objective_trace=np.asarray(obj_trace),
        rank_trace=np.asarray(rank_trace, dtype=int),
        step_trace=np.asarray(step_trace),
        lambda_trace=np.full(iterations, lam),
        iterations=iterations,
        termination=termination,
    )
