"""Kinetic Langevin sampling toolkit.

Exact one-step transition kernel of the discretized kinetic Langevin
chain, Monte Carlo drivers with reproducible per-replica noise streams,
an exact linear-Gaussian law-propagation engine for quadratic targets,
explicit convergence bounds with runnable (beta, eta, k) schedules, and
a CLI harness for deterministic experiments.
"""

__version__ = "0.1.0"

from ._backend import BACKEND, USING_NUMBA
from .bounds import (
    Schedule,
    ScheduleInput,
    discretization_tv_bound,
    hypocoercive_factor_explicit,
    make_schedule,
    total_tv_prediction,
)
from .chain import (
    ChainState,
    InitDistribution,
    MomentReport,
    RecordingPolicy,
    RunResult,
    kinetic_step,
    overdamped_step,
    run_chain,
)
from .divergences import (
    DiscreteDist,
    check_triangle_lemma,
    chi2_discrete,
    kl_discrete,
    tv_discrete,
)
from .errors import (
    ChainDivergedError,
    ConfigError,
    ScheduleUndefinedError,
    UnstableParametersError,
)
from .gaussian_exact import (
    GaussianLaw2D,
    ProductGaussianLaw,
    chi2_gaussian,
    discrete_stationary,
    discrete_transition_matrices,
    kl_gaussian,
    log1p_chi2_gaussian,
    pi_mode_law,
    product_pi_law,
    propagate_continuous,
    propagate_discrete,
    tv_upper_from_chi2,
    warm_start_law,
)
from .kernel import (
    SERIES_THRESHOLD,
    FrictionStep,
    KernelCoefficients,
    compute_coefficients,
    sample_noise,
    step_mean,
)
from .sweep import SweepRow, run_sweep
from .targets import (
    DiagonalGaussianTarget,
    GaussianMixtureTarget,
    TargetMeasure,
    TargetMetadata,
    make_diagonal_gaussian,
    make_gaussian_mixture,
    make_standard_gaussian,
)
