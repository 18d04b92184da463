"""Synthetic recovery experiments on seeded random low-rank matrices.

A trial draws a rank-r matrix as a product of standard-normal factors,
observes a uniformly random subset of entries (optionally with additive
Gaussian noise) and measures the relative recovery error of a chosen solver.
Trials are seeded independently from (experiment seed, rank, trial index) so
runs are reproducible and order-independent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .losses import CompletionProblem
from .penalties import Penalty
from .solver import noise_free_config, noisy_config, solve

__all__ = [
    "ExperimentSpec",
    "TrialRecord",
    "ExperimentResult",
    "gen_lowrank",
    "sample_mask",
    "add_noise",
    "relative_error",
    "run_trial",
    "run_experiment",
]

SUCCESS_THRESHOLD = 1e-3


def gen_lowrank(m: int, n: int, r: int, seed) -> np.ndarray:
    """Rank-r product of m x r and r x n standard normal factors."""
    if not 0 <= r <= min(m, n):
        raise ValueError(f"rank {r} out of range for {m}x{n}")
    if r == 0:
        return np.zeros((m, n))
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


def sample_mask(m: int, n: int, fraction: float, seed):
    """Uniform random observation set of round(fraction * m * n) entries."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    count = int(round(fraction * m * n))
    if count == 0:
        raise ValueError("fraction too small: empty observation set")
    rng = np.random.default_rng(seed)
    flat = rng.choice(m * n, size=count, replace=False)
    flat.sort()
    return np.unravel_index(flat, (m, n))


def add_noise(values, sigma: float, seed):
    """Add sigma-scaled standard normal noise to a vector of observations."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    values = np.asarray(values, dtype=float)
    if sigma == 0.0:
        return values.copy()
    rng = np.random.default_rng(seed)
    return values + sigma * rng.standard_normal(values.shape)


def relative_error(X_hat, M) -> float:
    """||X_hat - M||_F / ||M||_F."""
    M = np.asarray(M, dtype=float)
    denom = np.linalg.norm(M)
    if denom == 0.0:
        raise ValueError("reference matrix is zero")
    return float(np.linalg.norm(np.asarray(X_hat, dtype=float) - M) / denom)


@dataclass(frozen=True)
class ExperimentSpec:
    """Trial grid: (rank x trials) recoveries of m x n matrices."""

    m: int
    n: int
    rank_grid: tuple
    trials: int
    observe_fraction: float
    penalty: Penalty
    seed: int
    noise_sigma: float = 0.0
    mu: float = 1.1
    eta: float = 0.7
    max_iters: int = 500
    success_threshold: float = SUCCESS_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "rank_grid", tuple(int(r) for r in self.rank_grid))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 < self.observe_fraction <= 1.0:
            raise ValueError("observe_fraction must lie in (0, 1]")
        if any(r < 0 or r > min(self.m, self.n) for r in self.rank_grid):
            raise ValueError("ranks must lie in [0, min(m, n)]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class TrialRecord:
    rank: int
    trial: int
    rel_error: float
    success: bool
    iterations: int
    seconds: float
    error: str | None = None


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list = field(default_factory=list)

    def aggregates(self):
        """Per-rank (success frequency, mean relative error), rank-sorted."""
        out = {}
        for rank in self.spec.rank_grid:
            recs = [t for t in self.records if t.rank == rank and t.error is None]
            if not recs:
                out[rank] = (0.0, float("nan"))
                continue
            freq = sum(t.success for t in recs) / len(recs)
            mean_err = float(np.mean([t.rel_error for t in recs]))
            out[rank] = (freq, mean_err)
        return out

    def ranks_with_success_at_least(self, freq: float):
        return {r for r, (f, _) in self.aggregates().items() if f >= freq}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("rank,trial,rel_error,success,iters,seconds\n")
            for t in self.records:
                fh.write(
                    f"{t.rank},{t.trial},{t.rel_error!r},{int(t.success)},"
                    f"{t.iterations},{t.seconds:.3f}\n"
                )

    def aggregate_to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("rank,success_freq,mean_rel_error\n")
            for rank, (freq, err) in sorted(self.aggregates().items()):
                fh.write(f"{rank},{freq!r},{err!r}\n")


def _trial_problem(spec: ExperimentSpec, rank: int, trial: int):
    root = np.random.SeedSequence(spec.seed, spawn_key=(rank, trial))
    mat_seed, mask_seed, noise_seed = root.spawn(3)
    M = gen_lowrank(spec.m, spec.n, rank, mat_seed)
    rows, cols = sample_mask(spec.m, spec.n, spec.observe_fraction, mask_seed)
    values = add_noise(M[rows, cols], spec.noise_sigma, noise_seed)
    return M, CompletionProblem((spec.m, spec.n), rows, cols, values)


def run_trial(spec: ExperimentSpec, rank: int, trial: int) -> TrialRecord:
    M, problem = _trial_problem(spec, rank, trial)
    if spec.noise_sigma > 0:
        config = noisy_config(problem, mu=spec.mu, eta=spec.eta, max_iters=spec.max_iters)
    else:
        config = noise_free_config(
            problem, mu=spec.mu, eta=spec.eta, max_iters=spec.max_iters
        )
    start = time.perf_counter()
    try:
        report = solve(problem, spec.penalty, config)
    except Exception as exc:  # recorded per-trial, not fatal to the sweep
        return TrialRecord(
            rank, trial, float("nan"), False, 0, time.perf_counter() - start, str(exc)
        )
    seconds = time.perf_counter() - start
    norm_M = np.linalg.norm(M)
    if norm_M == 0.0:
        rel = 0.0 if np.linalg.norm(report.final_X) == 0.0 else float("inf")
    else:
        rel = relative_error(report.final_X, M)
    return TrialRecord(
        rank, trial, rel, rel < spec.success_threshold, report.iterations, seconds
    )


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    result = ExperimentResult(spec)
    for rank in spec.rank_grid:
        for trial in range(spec.trials):
            result.records.append(run_trial(spec, rank, trial))
    return result
