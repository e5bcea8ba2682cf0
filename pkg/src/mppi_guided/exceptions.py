"""Exception hierarchy shared across the package."""


class MppiGuidedError(Exception):
    """Base class for all package errors."""


class NonPositiveTemperature(MppiGuidedError):
    """Boltzmann temperature must be strictly positive."""


class EmptyBatch(MppiGuidedError):
    """An operation received an empty cost or sample batch."""


class NaNCost(MppiGuidedError):
    """A cost evaluation produced NaN (infinities are allowed)."""


class DegenerateBatch(MppiGuidedError):
    """Every sample in a batch carries zero weight (all costs infinite)."""


class LengthMismatch(MppiGuidedError):
    """Paired vectors/batches have inconsistent lengths."""


class DimensionMismatch(MppiGuidedError):
    """Vector or matrix dimensions are inconsistent."""


class CholeskyFailure(MppiGuidedError):
    """A matrix expected to be positive-definite failed its Cholesky factorization."""


class SingularSystem(MppiGuidedError):
    """A linear system arising in the guided update could not be solved."""


class CenterMismatch(MppiGuidedError):
    """A quadratic model was expanded at a different point than the prior mean."""


class FloorInfeasible(MppiGuidedError):
    """The requested guided-variance target is unreachable at this temperature/curvature."""

    def __init__(self, temperature: float, sigma_target_sq: float, kappa_max: float):
        self.temperature = temperature
        self.sigma_target_sq = sigma_target_sq
        self.kappa_max = kappa_max
        super().__init__(
            f"variance floor infeasible: temperature {temperature:g} <= "
            f"sigma_target_sq {sigma_target_sq:g} * kappa_max {kappa_max:g}; "
            "raise the temperature or lower the target width"
        )


class CapabilityMissing(MppiGuidedError):
    """The problem does not expose a capability (grad/hess/residual) required here."""


class EstimatorFailure(MppiGuidedError):
    """A randomized-smoothing evaluation produced NaN at a perturbed point."""


class ConfigInvalid(MppiGuidedError):
    """An experiment or optimizer configuration failed validation."""


class NonFiniteState(MppiGuidedError):
    """A dynamics rollout diverged to non-finite state values."""


class DegenerateTask(MppiGuidedError):
    """A performance-profile task has f_init == f_best and carries no signal."""


class EmptyInput(MppiGuidedError):
    """A statistics routine received no records."""


class GuidanceWarning(UserWarning):
    """Non-fatal guidance fallback (e.g. infeasible variance floor)."""
