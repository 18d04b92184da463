"""Thin SVD utilities and weighted singular value thresholding.

For a weight vector 0 <= w_1 <= ... <= w_s the problem

    min_X  sum_i w_i sigma_i(X) + 1/2 ||X - Y||_F^2

has the closed-form global minimizer U diag((sigma_i - w_i)_+) V^T where
Y = U diag(sigma) V^T is the SVD of Y.  Weights equal to +inf annihilate
their singular values exactly (the shrunk value is an exact floating-point
zero, not a small number), which is what makes rank decrease observable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralDecomposition",
    "svd",
    "shrink_spectrum",
    "wsvt_apply",
    "weighted_nuclear_norm",
    "numerical_rank",
]

# Relative cutoff under which singular values are reported as rank zero.
RANK_REL_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Thin SVD: U (m x s), sigma (s, nonincreasing), V (n x s)."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


def svd(Y: np.ndarray) -> SpectralDecomposition:
    """Thin SVD of a real matrix, tall inputs handled by transposition."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(Y)):
        raise ValueError("matrix entries must be finite")
    if Y.shape[0] > Y.shape[1]:
        inner = svd(Y.T)
        return SpectralDecomposition(U=inner.V, sigma=inner.sigma, V=inner.U)
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    return SpectralDecomposition(U=U, sigma=s, V=Vt.T)


def _check_weights(w, s_len: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size != s_len:
        raise ValueError(f"expected {s_len} weights, got shape {w.shape}")
    if np.any(np.isnan(w)) or np.any(w < 0):
        raise ValueError("weights must be nonnegative (finite or +inf)")
    if np.any(np.diff(w) < 0):
        raise ValueError("weights must be nondecreasing")
    return w


def shrink_spectrum(sigma: np.ndarray, w: np.ndarray) -> np.ndarray:
    """(sigma_i - w_i)_+ with +inf weights mapping to exact zeros."""
    return np.maximum(sigma - w, 0.0)


def wsvt_apply(Y: np.ndarray, w) -> np.ndarray:
    """Weighted singular value thresholding of Y.

    ``w`` must be nondecreasing and nonnegative with length min(Y.shape);
    entries may be +inf.  Returns the global minimizer of
    sum_i w_i sigma_i(X) + 1/2 ||X - Y||_F^2.
    """
    dec = svd(Y)
    w = _check_weights(w, dec.sigma.size)
    s = shrink_spectrum(dec.sigma, w)
    return (dec.U * s) @ dec.V.T


def weighted_nuclear_norm(X: np.ndarray, w) -> float:
    """sum_i w_i sigma_i(X) under extended arithmetic (inf * 0 == 0)."""
    sigma = svd(X).sigma
    w = _check_weights(w, sigma.size)
    with np.errstate(invalid="ignore"):
        terms = np.where(sigma == 0.0, 0.0, w * sigma)
    return float(terms.sum())


def numerical_rank(sigma: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Number of singular values above rel_tol times the largest one."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sigma > rel_tol * sigma[0]))
