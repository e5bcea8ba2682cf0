"""Quadratic surrogate models of the objective around the current mean.

A model is the triple (gradient g, Hessian H, value f(center)) defining

    m(x) = value + g . (x - center) + 0.5 (x - center)' H (x - center).

Providers build this triple in interchangeable ways:

* ``exact_model``        -- analytic grad/hess from the problem,
* ``finite_diff_model``  -- central differences of the objective (fallback
                            provider and the package-wide test oracle),
* ``gauss_newton_model`` -- g = J'R, H = J'J from a residual factorization,
* ``bfgs_update``        -- secant updates of a running curvature estimate,
* ``adam_diag_model``    -- diagonal curvature from the bias-corrected second
                            moment of the gradient (Adam's preconditioner),
* ``rs_gradient`` / ``rs_hessian`` / ``rs_model`` -- Monte Carlo estimators
  under Gaussian smoothing, optionally on a coarse-to-fine sigma schedule.

The RS estimators use a shared draw set z_j ~ N(0, sigma^2 I):

    g ~= (1/(M sigma^2)) sum (f(x+z_j) - f(x)) z_j
    H ~= (1/(M sigma^4)) sum (f(x+z_j) - f(x)) (z_j z_j' - sigma^2 I)

both unbiased on polynomials of degree <= 2 (the f(x) control variate
cancels; the Gaussian fourth-moment identity gives the Hessian).
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    CapabilityMissing,
    ConfigInvalid,
    DimensionMismatch,
    EstimatorFailure,
)
from .problems.base import finite_diff_grad, finite_diff_hess, has_capability

__all__ = [
    "QuadraticModel",
    "SmoothingConfig",
    "exact_model",
    "finite_diff_model",
    "gauss_newton_model",
    "bfgs_update",
    "bfgs_initial_hessian",
    "adam_diag_model",
    "rs_gradient",
    "rs_hessian",
    "rs_model",
    "ModelProvider",
    "ExactProvider",
    "FiniteDiffProvider",
    "GaussNewtonProvider",
    "BFGSProvider",
    "AdamDiagProvider",
    "RandomizedSmoothingProvider",
    "make_provider",
]


@dataclass(frozen=True)
class QuadraticModel:
    """Local quadratic surrogate m(x) around ``center``.

    The Hessian is symmetrized on construction; it may be indefinite (the
    guidance module is responsible for convexification).
    """

    center: np.ndarray
    value: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        grad = np.asarray(self.grad, dtype=float)
        hess = np.asarray(self.hess, dtype=float)
        d = center.shape[0]
        if center.ndim != 1 or grad.shape != (d,) or hess.shape != (d, d):
            raise DimensionMismatch(
                "model pieces disagree: center %s, grad %s, hess %s"
                % (center.shape, grad.shape, hess.shape)
            )
        scale = max(1.0, float(np.abs(hess).max()))
        if np.abs(hess - hess.T).max() > 1e-10 * scale:
            raise DimensionMismatch("hessian is not symmetric within tolerance")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", 0.5 * (hess + hess.T))

    @property
    def dim(self):
        return self.center.shape[0]

    def predict(self, x):
        """Evaluate m at a single point."""
        delta = np.asarray(x, dtype=float) - self.center
        return float(self.value + self.grad @ delta + 0.5 * delta @ self.hess @ delta)

    def predict_batch(self, points):
        """Evaluate m at each row of ``points``."""
        delta = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        quad = 0.5 * np.sum((delta @ self.hess) * delta, axis=1)
        return self.value + delta @ self.grad + quad


@dataclass(frozen=True)
class SmoothingConfig:
    """Gaussian smoothing scale and sample budget for the RS estimators.

    ``schedule`` is an optional list of (iteration threshold, sigma) pairs
    with strictly increasing thresholds: from each threshold on, that sigma
    replaces the default, giving coarse-to-fine smoothing over a run.
    """

    sigma: float = 1.0
    num_samples: int = 16
    schedule: tuple = field(default=())

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ConfigInvalid("smoothing sigma must be positive")
        if self.num_samples < 1:
            raise ConfigInvalid("smoothing needs at least one sample")
        schedule = tuple((int(k), float(s)) for k, s in self.schedule)
        thresholds = [k for k, _ in schedule]
        if any(s <= 0.0 for _, s in schedule):
            raise ConfigInvalid("scheduled sigmas must be positive")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ConfigInvalid("schedule thresholds must be strictly increasing")
        object.__setattr__(self, "schedule", schedule)

    def sigma_at(self, iteration):
        """Smoothing scale in effect at the given iteration index."""
        sigma = self.sigma
        for threshold, value in self.schedule:
            if iteration >= threshold:
                sigma = value
        return sigma


def exact_model(problem, x, value=None):
    """Quadratic model from the problem's analytic derivatives.

    ``value`` may carry a precomputed f(x) to avoid a duplicate evaluation.
    """
    if not (has_capability(problem, "grad") and has_capability(problem, "hess")):
        raise CapabilityMissing(
            "%s lacks analytic grad/hess needed for the exact model" % problem.name
        )
    x = np.asarray(x, dtype=float)
    hess = np.asarray(problem.hess(x), dtype=float)
    return QuadraticModel(
        center=x,
        value=problem.cost(x) if value is None else value,
        grad=problem.grad(x),
        hess=0.5 * (hess + hess.T),
    )


def finite_diff_model(problem, x, value=None):
    """Quadratic model from central differences of the objective alone."""
    x = np.asarray(x, dtype=float)
    grad = finite_diff_grad(problem.cost, x)
    hess = finite_diff_hess(lambda y: finite_diff_grad(problem.cost, y), x)
    return QuadraticModel(
        center=x,
        value=problem.cost(x) if value is None else value,
        grad=grad,
        hess=hess,
    )


def gauss_newton_model(problem, x):
    """Quadratic model g = J'R, H = J'J from the residual factorization.

    H is positive semidefinite by construction; the model value is taken
    from the residual identity 0.5 ||R||^2 == cost, saving one evaluation.
    """
    if not (has_capability(problem, "residual") and has_capability(problem, "jacobian")):
        raise CapabilityMissing(
            "%s lacks residual/jacobian needed for the Gauss-Newton model" % problem.name
        )
    x = np.asarray(x, dtype=float)
    res = np.asarray(problem.residual(x), dtype=float)
    jac = np.asarray(problem.jacobian(x), dtype=float)
    return QuadraticModel(
        center=x,
        value=0.5 * float(res @ res),
        grad=jac.T @ res,
        hess=jac.T @ jac,
    )


def bfgs_update(prev_hess, s, y, curvature_threshold=1e-10):
    """One secant update of a direct Hessian approximation.

    Returns ``prev_hess`` unchanged when the curvature condition
    s'y > threshold * ||s|| ||y|| fails, which preserves positive
    definiteness across ill-behaved steps.
    """
    prev_hess = np.asarray(prev_hess, dtype=float)
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    d = s.shape[0]
    if y.shape != (d,) or prev_hess.shape != (d, d):
        raise DimensionMismatch(
            "BFGS update shapes disagree: hess %s, s %s, y %s"
            % (prev_hess.shape, s.shape, y.shape)
        )
    sy = float(s @ y)
    if sy <= curvature_threshold * np.linalg.norm(s) * np.linalg.norm(y):
        return prev_hess
    bs = prev_hess @ s
    sbs = float(s @ bs)
    if sbs <= 0.0:
        return prev_hess
    updated = prev_hess - np.outer(bs, bs) / sbs + np.outer(y, y) / sy
    return 0.5 * (updated + updated.T)


def bfgs_initial_hessian(x0, grad0, clamp=(1e-3, 1e3)):
    """Scaled-identity start B0 = clip(||g0|| / ||x0||, clamp) * I."""
    x0 = np.asarray(x0, dtype=float)
    grad0 = np.asarray(grad0, dtype=float)
    norm_x = np.linalg.norm(x0)
    norm_g = np.linalg.norm(grad0)
    scale = norm_g / norm_x if norm_x > 0.0 and norm_g > 0.0 else 1.0
    return float(np.clip(scale, *clamp)) * np.eye(x0.shape[0])


def adam_diag_model(state, x, grad, value, beta2=0.999, eps_adam=1e-8):
    """Diagonal-curvature model from the second moment of the gradient.

    ``state`` is (v, t) — the running EMA of grad^2 and the step count —
    or None on the first call.  The curvature is diag(sqrt(v_hat) + eps)
    with v_hat the bias-corrected moment, i.e. Adam's preconditioner read
    as a Hessian.  Returns (model, new_state); the gradient passes through
    unchanged.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if state is None:
        v, t = np.zeros_like(grad), 0
    else:
        v, t = state
    v = beta2 * v + (1.0 - beta2) * grad**2
    t = t + 1
    v_hat = v / (1.0 - beta2**t)
    model = QuadraticModel(
        center=x, value=value, grad=grad, hess=np.diag(np.sqrt(v_hat) + eps_adam)
    )
    return model, (v, t)


def _rs_estimates(problem, x, sigma, num_samples, rng, center_value=None):
    """Shared machinery: draws, evaluation batch, and centered differences."""
    x = np.asarray(x, dtype=float)
    draws = sigma * rng.standard_normal((num_samples, x.shape[0]))
    if center_value is None:
        center_value = problem.cost(x)
    values = np.asarray(problem.cost_batch(x + draws), dtype=float)
    if np.isnan(center_value):
        raise EstimatorFailure("objective returned NaN at the expansion point")
    nan_idx = np.flatnonzero(np.isnan(values))
    if nan_idx.size:
        raise EstimatorFailure(
            "objective returned NaN at smoothing sample %d" % int(nan_idx[0])
        )
    return center_value, values - center_value, draws


def _rs_grad_from(diffs, draws, sigma):
    return draws.T @ diffs / (draws.shape[0] * sigma**2)


def _rs_hess_from(diffs, draws, sigma):
    num_samples, dim = draws.shape
    hess = draws.T @ (diffs[:, None] * draws) - sigma**2 * diffs.sum() * np.eye(dim)
    hess /= num_samples * sigma**4
    return 0.5 * (hess + hess.T)


def rs_gradient(problem, x, cfg, rng):
    """Monte Carlo gradient of the Gaussian-smoothed objective."""
    _, diffs, draws = _rs_estimates(problem, x, cfg.sigma, cfg.num_samples, rng)
    return _rs_grad_from(diffs, draws, cfg.sigma)


def rs_hessian(problem, x, cfg, rng):
    """Monte Carlo Hessian of the Gaussian-smoothed objective, symmetrized."""
    _, diffs, draws = _rs_estimates(problem, x, cfg.sigma, cfg.num_samples, rng)
    return _rs_hess_from(diffs, draws, cfg.sigma)


def rs_model(problem, x, cfg, rng, iteration=0, value=None):
    """Gradient and Hessian estimates on one shared draw set (M+1 evals).

    When ``cfg.schedule`` is non-empty the smoothing scale is selected by
    the iteration index, giving coarse-to-fine model construction.
    """
    sigma = cfg.sigma_at(iteration)
    value, diffs, draws = _rs_estimates(problem, x, sigma, cfg.num_samples, rng, value)
    return QuadraticModel(
        center=np.asarray(x, dtype=float),
        value=value,
        grad=_rs_grad_from(diffs, draws, sigma),
        hess=_rs_hess_from(diffs, draws, sigma),
    )


class ModelProvider:
    """Uniform strategy interface used by the optimizer loop.

    ``build`` returns (model, new_state); providers that carry history
    (BFGS, Adam) thread it through ``state`` explicitly so the loop stays
    free of hidden mutation.
    """

    name = "provider"

    def init_state(self, problem, x0):
        return None

    def build(self, problem, x, iteration, rng, state, value=None):
        """Return (model, new_state); ``value`` is an optional precomputed f(x)."""
        raise NotImplementedError


class ExactProvider(ModelProvider):
    name = "exact"

    def build(self, problem, x, iteration, rng, state, value=None):
        return exact_model(problem, x, value), state


class FiniteDiffProvider(ModelProvider):
    name = "finite_diff"

    def build(self, problem, x, iteration, rng, state, value=None):
        return finite_diff_model(problem, x, value), state


class GaussNewtonProvider(ModelProvider):
    name = "gauss_newton"

    def build(self, problem, x, iteration, rng, state, value=None):
        return gauss_newton_model(problem, x), state


class BFGSProvider(ModelProvider):
    """Secant-updated curvature with analytic gradients.

    State is (previous x, previous gradient, current approximation B).
    """

    name = "bfgs"

    def __init__(self, curvature_threshold=1e-10, init_clamp=(1e-3, 1e3)):
        self.curvature_threshold = curvature_threshold
        self.init_clamp = init_clamp

    def build(self, problem, x, iteration, rng, state, value=None):
        if not has_capability(problem, "grad"):
            raise CapabilityMissing(
                "%s lacks gradients needed for the BFGS model" % problem.name
            )
        x = np.asarray(x, dtype=float)
        grad = np.asarray(problem.grad(x), dtype=float)
        if state is None:
            hess = bfgs_initial_hessian(x, grad, self.init_clamp)
        else:
            prev_x, prev_grad, prev_hess = state
            hess = bfgs_update(
                prev_hess, x - prev_x, grad - prev_grad, self.curvature_threshold
            )
        if value is None:
            value = problem.cost(x)
        model = QuadraticModel(center=x, value=value, grad=grad, hess=hess)
        return model, (x, grad, hess)


class AdamDiagProvider(ModelProvider):
    """Diagonal curvature from the gradient's second moment."""

    name = "adam_diag"

    def __init__(self, beta2=0.999, eps_adam=1e-8):
        self.beta2 = beta2
        self.eps_adam = eps_adam

    def build(self, problem, x, iteration, rng, state, value=None):
        if not has_capability(problem, "grad"):
            raise CapabilityMissing(
                "%s lacks gradients needed for the Adam-diagonal model" % problem.name
            )
        x = np.asarray(x, dtype=float)
        grad = np.asarray(problem.grad(x), dtype=float)
        if value is None:
            value = problem.cost(x)
        return adam_diag_model(state, x, grad, value, self.beta2, self.eps_adam)


class RandomizedSmoothingProvider(ModelProvider):
    """Derivative-free models from Gaussian-smoothing estimators."""

    name = "rs"

    def __init__(self, cfg=None):
        self.cfg = cfg if cfg is not None else SmoothingConfig()

    def build(self, problem, x, iteration, rng, state, value=None):
        return rs_model(problem, x, self.cfg, rng, iteration, value), state


_PROVIDERS = {
    "exact": ExactProvider,
    "finite_diff": FiniteDiffProvider,
    "gauss_newton": GaussNewtonProvider,
    "bfgs": BFGSProvider,
    "adam_diag": AdamDiagProvider,
    "rs": RandomizedSmoothingProvider,
}


def make_provider(name, **kwargs):
    """Construct a model provider by name (see _PROVIDERS for choices)."""
    key = str(name).lower()
    if key not in _PROVIDERS:
        raise ConfigInvalid(
            "unknown model provider %r (choose from %s)"
            % (name, ", ".join(sorted(_PROVIDERS)))
        )
    return _PROVIDERS[key](**kwargs)
