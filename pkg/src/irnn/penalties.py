"""Concave sparsity-promoting penalties applied to singular values.

Every penalty here is a function g_lam(theta) defined for theta >= 0 that is
continuous, concave and monotonically increasing, with g_lam(0) = 0.  Because
the penalties are concave, the natural derivative object is the supergradient:
any v with g(x) + v*(y - x) >= g(y) for all y.  Supergradients of these
penalties are nonnegative and nonincreasing in theta, which is the property
the reweighted solver relies on.

At nonsmooth points where the superdifferential is an interval, a single
deterministic element is returned: the right limit.  This keeps the selection
function nonincreasing globally (capped-L1 at theta = gamma returns 0, the
right limit, rather than anything in [0, lam]).  The Lp penalty gets the
conventional extended value +inf at theta = 0, which downstream thresholding
turns into an exact zero.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Penalty",
    "PENALTY_KINDS",
    "value",
    "value_at_index",
    "supergradient",
    "supergradient_at_index",
    "spectrum_value",
    "weights_from_singular_values",
]

# Canonical kind names, plus accepted spellings from CLI/config files.
PENALTY_KINDS = (
    "lp",
    "scad",
    "logarithm",
    "mcp",
    "capped_l1",
    "etp",
    "geman",
    "laplace",
    "nuclear",
    "truncated",
)

_ALIASES = {
    "log": "logarithm",
    "cappedl1": "capped_l1",
    "capped-l1": "capped_l1",
    "nuclear_convex": "nuclear",
    "convex": "nuclear",
    "truncated_nuclear": "truncated",
    "tnn": "truncated",
}

# Shape-parameter defaults are tuning knobs, not canonical values; override
# per experiment via config.
_DEFAULT_GAMMA = {
    "scad": 3.7,
    "logarithm": 10.0,
    "mcp": 1.5,
    "capped_l1": 1.0,
    "etp": 2.0,
    "geman": 1.0,
    "laplace": 1.0,
}
_DEFAULT_P = 0.5

_NEEDS_GAMMA = frozenset(_DEFAULT_GAMMA)


@dataclass(frozen=True)
class Penalty:
    """A concave surrogate penalty with its parameters.

    ``lam`` scales the whole penalty.  ``gamma`` is the shape parameter of
    scad/logarithm/mcp/capped_l1/etp/geman/laplace, ``p`` the lp exponent in
    (0, 1), and ``trunc_rank`` the number of leading singular values left
    unpenalized by the truncated kind.  Instances are immutable; all
    evaluation functions are pure.
    """

    kind: str
    lam: float = 1.0
    gamma: float | None = None
    p: float | None = None
    trunc_rank: int | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lam must be a positive finite real")

        if kind == "lp":
            p = _DEFAULT_P if self.p is None else float(self.p)
            if not 0.0 < p < 1.0:
                raise ValueError("lp exponent p must lie in (0, 1)")
            object.__setattr__(self, "p", p)
        elif self.p is not None:
            raise ValueError(f"p is not a parameter of the {kind} penalty")

        if kind in _NEEDS_GAMMA:
            gamma = _DEFAULT_GAMMA[kind] if self.gamma is None else float(self.gamma)
            if kind == "scad":
                if gamma <= 1.0:
                    raise ValueError("scad requires gamma > 1")
            elif gamma <= 0.0:
                raise ValueError(f"{kind} requires gamma > 0")
            object.__setattr__(self, "gamma", gamma)
        elif self.gamma is not None:
            raise ValueError(f"gamma is not a parameter of the {kind} penalty")

        if kind == "truncated":
            r = 0 if self.trunc_rank is None else self.trunc_rank
            if int(r) != r or r < 0:
                raise ValueError("trunc_rank must be a nonnegative integer")
            object.__setattr__(self, "trunc_rank", int(r))
        elif self.trunc_rank is not None:
            raise ValueError("trunc_rank only applies to the truncated penalty")

    def with_lam(self, lam: float) -> "Penalty":
        """Same penalty with a different regularization strength."""
        return dataclasses.replace(self, lam=lam)


def _check_theta(theta):
    arr = np.asarray(theta, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("theta must be finite and nonnegative")
    return arr


def _value_arr(pen: Penalty, t: np.ndarray) -> np.ndarray:
    lam = pen.lam
    kind = pen.kind
    if kind == "lp":
        return lam * t**pen.p
    if kind == "scad":
        g = pen.gamma
        gl = g * lam
        return np.select(
            [t <= lam, t <= gl],
            [lam * t, (-t * t + 2.0 * gl * t - lam * lam) / (2.0 * (g - 1.0))],
            default=lam * lam * (g + 1.0) / 2.0,
        )
    if kind == "logarithm":
        g = pen.gamma
        return (lam / np.log(g + 1.0)) * np.log(g * t + 1.0)
    if kind == "mcp":
        g = pen.gamma
        return np.where(t < g * lam, lam * t - t * t / (2.0 * g), g * lam * lam / 2.0)
    if kind == "capped_l1":
        g = pen.gamma
        return np.where(t < g, lam * t, lam * g)
    if kind == "etp":
        g = pen.gamma
        return (lam / (1.0 - np.exp(-g))) * (1.0 - np.exp(-g * t))
    if kind == "geman":
        return lam * t / (t + pen.gamma)
    if kind == "laplace":
        return lam * (1.0 - np.exp(-t / pen.gamma))
    if kind == "nuclear":
        return lam * t
    raise ValueError(
        "the truncated penalty is indexed per singular value; use value_at_index"
    )


def _supergradient_arr(pen: Penalty, t: np.ndarray) -> np.ndarray:
    lam = pen.lam
    kind = pen.kind
    if kind == "lp":
        p = pen.p
        with np.errstate(divide="ignore"):
            g = lam * p * np.power(t, p - 1.0)
        return np.where(t == 0.0, np.inf, g)
    if kind == "scad":
        g = pen.gamma
        gl = g * lam
        return np.select(
            [t <= lam, t <= gl], [np.full_like(t, lam), (gl - t) / (g - 1.0)], default=0.0
        )
    if kind == "logarithm":
        g = pen.gamma
        return g * lam / ((g * t + 1.0) * np.log(g + 1.0))
    if kind == "mcp":
        g = pen.gamma
        return np.where(t < g * lam, lam - t / g, 0.0)
    if kind == "capped_l1":
        # Right limit at the kink t == gamma: 0, the infimum of [0, lam].
        return np.where(t < pen.gamma, lam, 0.0)
    if kind == "etp":
        g = pen.gamma
        return (lam * g / (1.0 - np.exp(-g))) * np.exp(-g * t)
    if kind == "geman":
        g = pen.gamma
        return lam * g / (t + g) ** 2
    if kind == "laplace":
        g = pen.gamma
        return (lam / g) * np.exp(-t / g)
    if kind == "nuclear":
        return np.full_like(t, lam)
    raise ValueError(
        "the truncated penalty is indexed per singular value; "
        "use supergradient_at_index"
    )


def value(penalty: Penalty, theta):
    """Evaluate g_lam(theta).  Accepts scalars or arrays of theta >= 0."""
    arr = _check_theta(theta)
    out = _value_arr(penalty, arr)
    return float(out) if np.isscalar(theta) or arr.ndim == 0 else out


def supergradient(penalty: Penalty, theta):
    """One deterministic element of the superdifferential at theta.

    Returns +inf for the lp penalty at theta = 0; the right limit at interval
    superdifferentials (capped_l1 at its kink).
    """
    arr = _check_theta(theta)
    out = _supergradient_arr(penalty, arr)
    return float(out) if np.isscalar(theta) or arr.ndim == 0 else out


def value_at_index(penalty: Penalty, i: int, theta):
    """Penalty value for the i-th (0-based) singular value.

    Only the truncated kind actually depends on the index: the leading
    ``trunc_rank`` singular values are free, the rest pay lam * theta.
    """
    arr = _check_theta(theta)
    if penalty.kind == "truncated":
        out = np.zeros_like(arr) if i < penalty.trunc_rank else penalty.lam * arr
    else:
        out = _value_arr(penalty, arr)
    return float(out) if np.isscalar(theta) or arr.ndim == 0 else out


def supergradient_at_index(penalty: Penalty, i: int, theta):
    """Supergradient for the i-th (0-based) singular value."""
    arr = _check_theta(theta)
    if penalty.kind == "truncated":
        w = 0.0 if i < penalty.trunc_rank else penalty.lam
        out = np.full_like(arr, w)
    else:
        out = _supergradient_arr(penalty, arr)
    return float(out) if np.isscalar(theta) or arr.ndim == 0 else out


def spectrum_value(penalty: Penalty, sigma: np.ndarray) -> float:
    """Total penalty of a spectrum: sum_i g_i(sigma_i)."""
    sigma = _check_theta(sigma)
    if penalty.kind == "truncated":
        return float(penalty.lam * sigma[penalty.trunc_rank :].sum())
    return float(_value_arr(penalty, sigma).sum())


def weights_from_singular_values(penalty: Penalty, sigma) -> np.ndarray:
    """Per-singular-value weights w_i = supergradient at sigma_i.

    ``sigma`` must be sorted nonincreasing (as returned by an SVD); the
    antimonotone supergradient then yields nondecreasing nonnegative weights,
    which is exactly the precondition of the weighted thresholding operator.
    Entries may be +inf (lp at exact zeros).
    """
    sigma = _check_theta(sigma)
    if sigma.ndim != 1:
        raise ValueError("sigma must be a 1-D vector")
    if np.any(np.diff(sigma) > 0):
        raise ValueError("sigma must be sorted nonincreasing")
    if penalty.kind == "truncated":
        w = np.where(np.arange(sigma.size) < penalty.trunc_rank, 0.0, penalty.lam)
    else:
        w = _supergradient_arr(penalty, sigma)
    return w
