"""Model-guided sampling optimization with quadratic-surrogate variance reduction.

The package splits the objective f into a local quadratic surrogate m and a
residual r = f - m.  Multiplying the Gaussian sampling prior by the
Boltzmann factor exp(-m/temperature) has a closed form (``guidance``), so
the surrogate's share of the work is handled analytically and Monte Carlo
weight is spent only on the residual (``optimizers.guided_mppi_step``).
Surrogates come from interchangeable providers (``models``): analytic
derivatives, finite differences, Gauss-Newton factorization, secant (BFGS)
updates, a diagonal second-moment model, or Gaussian-smoothing estimators
with an optional coarse-to-fine schedule.

``problems`` supplies analytic test functions and a cart-pole swing-up
trajectory problem with exact derivatives; ``harness`` runs seeded,
reproducible benchmark sweeps and writes deterministic CSV/JSON reports
(command line: ``mppi-guided``).
"""

from . import exceptions
from .core import (
    GaussianParams,
    SampleBatch,
    WeightVector,
    boltzmann_weights,
    child_rng,
    effective_sample_size,
    sample_gaussian,
    weighted_mean,
)
from .guidance import (
    GuidanceConfig,
    GuidedPrior,
    build_guided_prior,
    convexify,
    ema_smooth,
    guided_covariance,
    guided_mean,
    guided_step,
    variance_floor,
)
from .models import (
    ModelProvider,
    QuadraticModel,
    SmoothingConfig,
    make_provider,
    rs_gradient,
    rs_hessian,
    rs_model,
)
from .optimizers import (
    OPTIMIZER_KINDS,
    OptimizerConfig,
    RunRecord,
    RunRow,
    StopRule,
    cem_step,
    guided_mppi_step,
    newton_reference,
    run,
    vanilla_mppi_step,
)
from .problems import (
    CartPoleSpec,
    CartPoleSwingUp,
    CountingProblem,
    Problem,
    make_static,
)

__version__ = "0.1.0"

__all__ = [
    "exceptions",
    "GaussianParams",
    "SampleBatch",
    "WeightVector",
    "boltzmann_weights",
    "child_rng",
    "effective_sample_size",
    "sample_gaussian",
    "weighted_mean",
    "GuidanceConfig",
    "GuidedPrior",
    "build_guided_prior",
    "convexify",
    "ema_smooth",
    "guided_covariance",
    "guided_mean",
    "guided_step",
    "variance_floor",
    "ModelProvider",
    "QuadraticModel",
    "SmoothingConfig",
    "make_provider",
    "rs_gradient",
    "rs_hessian",
    "rs_model",
    "OPTIMIZER_KINDS",
    "OptimizerConfig",
    "RunRecord",
    "RunRow",
    "StopRule",
    "cem_step",
    "guided_mppi_step",
    "newton_reference",
    "run",
    "vanilla_mppi_step",
    "CartPoleSpec",
    "CartPoleSwingUp",
    "CountingProblem",
    "Problem",
    "make_static",
    "__version__",
]
