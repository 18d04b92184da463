"""Smooth squared losses with gradients and Lipschitz constants.

Two losses are provided: entrywise matrix completion (observe a subset of
entries, quadratic penalty on the residual at observed positions) and a
generic squared affine loss 1/2 ||A(X) - b||^2 given as a pair of callables.
Both expose ``value``, ``eval_and_gradient``, ``residual_norm`` and
``lipschitz``; the completion loss has Lipschitz constant exactly 1.
"""

from __future__ import annotations

import csv

import numpy as np

__all__ = [
    "CompletionProblem",
    "AffineLoss",
    "check_adjoint",
    "estimate_lipschitz",
    "save_triplets",
    "load_triplets",
    "save_dense",
    "load_dense",
]


class CompletionProblem:
    """Observed entries of an m x n matrix with a quadratic fit loss.

    f(X) = 1/2 ||P_Omega(X - M)||_F^2, where P_Omega zeroes everything
    outside the observed index set.  The gradient is the masked residual
    itself and the gradient Lipschitz constant is 1.
    """

    def __init__(self, shape, rows, cols, values):
        m, n = int(shape[0]), int(shape[1])
        if m < 1 or n < 1:
            raise ValueError("shape must be positive")
        rows = np.asarray(rows, dtype=np.intp).ravel()
        cols = np.asarray(cols, dtype=np.intp).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if not (rows.size == cols.size == values.size):
            raise ValueError("rows, cols and values must have equal length")
        if rows.size == 0:
            raise ValueError("at least one observed entry is required")
        if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
            raise ValueError("observed indices out of bounds")
        if not np.all(np.isfinite(values)):
            raise ValueError("observed values must be finite")

        lin = rows * n + cols
        order = np.argsort(lin, kind="stable")
        lin = lin[order]
        if np.any(np.diff(lin) == 0):
            raise ValueError("duplicate observed indices")

        self.shape = (m, n)
        self.rows = rows[order]
        self.cols = cols[order]
        self.values = values[order]
        self.mask = np.zeros((m, n), dtype=bool)
        self.mask[self.rows, self.cols] = True

    @classmethod
    def from_dense(cls, M, mask) -> "CompletionProblem":
        """Build from a dense matrix and a boolean observation mask."""
        M = np.asarray(M, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if M.shape != mask.shape:
            raise ValueError("matrix and mask shapes differ")
        rows, cols = np.nonzero(mask)
        return cls(M.shape, rows, cols, M[rows, cols])

    @property
    def n_observed(self) -> int:
        return self.values.size

    def observed_matrix(self) -> np.ndarray:
        """Dense matrix with observed values in place, zeros elsewhere."""
        M0 = np.zeros(self.shape)
        M0[self.rows, self.cols] = self.values
        return M0

    def observed_inf_norm(self) -> float:
        return float(np.abs(self.values).max())

    def observed_fro_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def _residual(self, X):
        if X.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {X.shape}")
        return X[self.rows, self.cols] - self.values

    def value(self, X) -> float:
        r = self._residual(np.asarray(X, dtype=float))
        return 0.5 * float(r @ r)

    def eval_and_gradient(self, X):
        X = np.asarray(X, dtype=float)
        r = self._residual(X)
        grad = np.zeros(self.shape)
        grad[self.rows, self.cols] = r
        return 0.5 * float(r @ r), grad

    def residual_norm(self, X) -> float:
        return float(np.linalg.norm(self._residual(np.asarray(X, dtype=float))))

    def lipschitz(self) -> float:
        return 1.0


class AffineLoss:
    """Squared affine loss 1/2 ||A(X) - b||^2 for a linear map A.

    ``apply`` maps an (m, n) matrix to a length-d vector and ``adjoint`` is
    its adjoint.  The gradient Lipschitz constant equals the spectral radius
    of A*A; it is supplied by the caller (see ``estimate_lipschitz`` for a
    power-iteration estimate) because the solver's step-size guarantee
    depends on it being an upper bound.
    """

    def __init__(self, shape, apply, adjoint, offset, lipschitz_bound):
        self.shape = (int(shape[0]), int(shape[1]))
        self.apply = apply
        self.adjoint = adjoint
        self.offset = np.asarray(offset, dtype=float).ravel()
        if not (np.isfinite(lipschitz_bound) and lipschitz_bound > 0):
            raise ValueError("lipschitz_bound must be positive and finite")
        self.lipschitz_bound = float(lipschitz_bound)

    def _residual(self, X):
        if X.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {X.shape}")
        return np.asarray(self.apply(X), dtype=float).ravel() - self.offset

    def value(self, X) -> float:
        r = self._residual(np.asarray(X, dtype=float))
        return 0.5 * float(r @ r)

    def eval_and_gradient(self, X):
        X = np.asarray(X, dtype=float)
        r = self._residual(X)
        return 0.5 * float(r @ r), np.asarray(self.adjoint(r), dtype=float)

    def residual_norm(self, X) -> float:
        return float(np.linalg.norm(self._residual(np.asarray(X, dtype=float))))

    def lipschitz(self) -> float:
        return self.lipschitz_bound


def check_adjoint(loss: AffineLoss, n_probes: int = 5, seed: int = 0, tol: float = 1e-8):
    """Verify <A(X), y> == <X, A*(y)> on random probes; raises on mismatch."""
    rng = np.random.default_rng(seed)
    d = loss.offset.size
    for _ in range(n_probes):
        X = rng.standard_normal(loss.shape)
        y = rng.standard_normal(d)
        lhs = float(np.asarray(loss.apply(X)).ravel() @ y)
        rhs = float((X * np.asarray(loss.adjoint(y))).sum())
        scale = max(1.0, abs(lhs), abs(rhs))
        if abs(lhs - rhs) > tol * scale:
            raise ValueError(f"adjoint mismatch: <A(X),y>={lhs} vs <X,A*(y)>={rhs}")


def estimate_lipschitz(loss: AffineLoss, iters: int = 100, seed: int = 0) -> float:
    """Power-iteration estimate of the spectral radius of A*A."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal(loss.shape)
    X /= np.linalg.norm(X)
    est = 0.0
    for _ in range(iters):
        Y = np.asarray(loss.adjoint(np.asarray(loss.apply(X)).ravel()))
        nrm = np.linalg.norm(Y)
        if nrm == 0.0:
            return 0.0
        est = nrm
        X = Y / nrm
    return float(est)


def save_triplets(path, problem: CompletionProblem):
    """Write observed entries as CSV rows ``row,col,value`` (0-based).

    The matrix shape travels in a leading ``# shape m n`` comment line.
    """
    with open(path, "w", newline="") as fh:
        fh.write(f"# shape {problem.shape[0]} {problem.shape[1]}\n")
        fh.write("row,col,value\n")
        for r, c, v in zip(problem.rows, problem.cols, problem.values):
            fh.write(f"{r},{c},{v!r}\n")


def load_triplets(path) -> CompletionProblem:
    """Read a completion problem written by :func:`save_triplets`."""
    shape = None
    rows, cols, values = [], [], []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts and parts[0] == "shape":
                    shape = (int(parts[1]), int(parts[2]))
                continue
            if line.lower().startswith("row"):
                continue
            r, c, v = next(csv.reader([line]))
            rows.append(int(r))
            cols.append(int(c))
            values.append(float(v))
    if shape is None:
        raise ValueError("missing '# shape m n' header line")
    return CompletionProblem(shape, rows, cols, values)


def save_dense(path, X):
    """Write a dense matrix as plain comma-separated rows."""
    np.savetxt(path, np.asarray(X, dtype=float), fmt="%.17g", delimiter=",")


def load_dense(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))
