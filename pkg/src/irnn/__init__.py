"""Nonconvex low-rank matrix recovery by iteratively reweighted nuclear
norm minimization, with a convex baseline and experiment harnesses."""

from .baselines import ConvexConfig, solve_convex
from .bench import (
    ExperimentResult,
    ExperimentSpec,
    TrialRecord,
    add_noise,
    gen_lowrank,
    relative_error,
    run_experiment,
    run_trial,
    sample_mask,
)
from .imaging import (
    ImageBuffer,
    apply_text_mask,
    corrupt_random,
    inpaint,
    psnr,
    sample_image_path,
)
from .losses import (
    AffineLoss,
    CompletionProblem,
    check_adjoint,
    estimate_lipschitz,
    load_dense,
    load_triplets,
    save_dense,
    save_triplets,
)
from .penalties import (
    PENALTY_KINDS,
    Penalty,
    supergradient,
    supergradient_at_index,
    value,
    value_at_index,
    weights_from_singular_values,
)
from .solver import (
    ContinuationSchedule,
    DescentError,
    SolveReport,
    SolverConfig,
    irnn_step,
    noise_free_config,
    noisy_config,
    objective,
    solve,
    solve_truncated,
)
from .wsvt import (
    SpectralDecomposition,
    numerical_rank,
    svd,
    weighted_nuclear_norm,
    wsvt_apply,
)

__version__ = "0.1.0"
