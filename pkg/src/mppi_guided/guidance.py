"""Fold a quadratic surrogate into the sampling distribution.

Multiplying a Gaussian prior N(mean, cov) by the Boltzmann factor of a
convex quadratic exp(-m(x)/temperature) is again Gaussian, with

    cov_g  = (cov^-1 + H / temperature)^-1
    mean_g = mean - (temperature cov^-1 + H)^-1 g

(`guided_covariance` / `guided_mean`).  The incremental form
(`guided_step`) returns the mean shift delta and covariance for a tunable
base covariance instead of the running prior.  `build_guided_prior` chains
the practical safeguards around the closed form:

    convexify -> variance floor on the base covariance -> guided_step
              -> exponential smoothing of (delta, cov) across iterations.

The variance floor keeps the guided distribution from collapsing: for an
isotropic base sigma0^2 I and maximum curvature kappa_max, requiring the
narrowest guided variance temperature*sigma0^2/(temperature + sigma0^2*kappa_max)
to stay >= sigma_target^2 gives the lower bound

    sigma0^2 >= temperature * sigma_target^2 / (temperature - sigma_target^2 * kappa_max),

which is infeasible when the denominator is non-positive (the target is
unreachable at this temperature).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import GaussianParams
from .exceptions import (
    CenterMismatch,
    CholeskyFailure,
    ConfigInvalid,
    FloorInfeasible,
    GuidanceWarning,
    SingularSystem,
)
from .models import QuadraticModel

__all__ = [
    "GuidanceConfig",
    "GuidedPrior",
    "convexify",
    "guided_covariance",
    "guided_mean",
    "guided_step",
    "ema_smooth",
    "variance_floor",
    "build_guided_prior",
]


@dataclass(frozen=True)
class GuidanceConfig:
    """Temperature, smoothing factors, and safety floors for guidance.

    ``sigma_target_sq`` of None disables the variance floor entirely;
    ``sigma0_sq_ceiling`` is the fallback base variance used (with a
    warning) when the floor is infeasible at the current curvature.
    """

    temperature: float = 0.1
    alpha_delta: float = 1.0
    alpha_sigma: float = 1.0
    sigma_target_sq: float = None
    hess_floor: float = 1e-6
    sigma0_sq_ceiling: float = 1.0

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ConfigInvalid("guidance temperature must be positive")
        if not 0.0 <= self.alpha_delta <= 1.0 or not 0.0 <= self.alpha_sigma <= 1.0:
            raise ConfigInvalid("smoothing factors must lie in [0, 1]")
        if self.sigma_target_sq is not None and self.sigma_target_sq <= 0.0:
            raise ConfigInvalid("sigma_target_sq must be positive (or None to disable)")
        if self.hess_floor <= 0.0:
            raise ConfigInvalid("hess_floor must be positive")
        if self.sigma0_sq_ceiling <= 0.0:
            raise ConfigInvalid("sigma0_sq_ceiling must be positive")


def _assert_pd(matrix, label):
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure("%s is not positive definite" % label) from exc


@dataclass(frozen=True)
class GuidedPrior:
    """The sampling distribution after guidance, plus telemetry flags.

    ``mean``/``cov`` define the Gaussian the optimizer samples from;
    ``ema_delta``/``ema_cov`` are the smoothed state threaded to the next
    iteration.  The flags record which safeguards fired: Hessian eigenvalue
    clamping, base-variance rescaling, an infeasible floor (fell back to
    the ceiling), and the post-hoc eigenvalue clamp used for anisotropic
    priors.  ``sigma0_sq`` is the base variance actually used, when the
    base was isotropic.
    """

    mean: np.ndarray
    cov: np.ndarray
    ema_delta: np.ndarray
    ema_cov: np.ndarray
    hess_clamped: bool = False
    variance_floor_applied: bool = False
    floor_infeasible: bool = False
    anisotropic_clamped: bool = False
    sigma0_sq: float = None

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))
        object.__setattr__(self, "ema_delta", np.asarray(self.ema_delta, dtype=float))
        object.__setattr__(self, "ema_cov", np.asarray(self.ema_cov, dtype=float))
        _assert_pd(self.cov, "guided covariance")
        _assert_pd(self.ema_cov, "smoothed covariance")

    def as_gaussian(self):
        return GaussianParams(mean=self.mean, cov=self.cov)


def convexify(hess, floor):
    """Clamp eigenvalues up to ``floor``; positive definite, same eigenvectors.

    A matrix whose smallest eigenvalue already exceeds the floor is returned
    unchanged (no eigendecomposition roundoff on the common path).
    """
    hess = np.asarray(hess, dtype=float)
    hess = 0.5 * (hess + hess.T)
    eigvals, eigvecs = np.linalg.eigh(hess)
    if eigvals[0] >= floor:
        return hess
    clamped = np.maximum(eigvals, floor)
    return (eigvecs * clamped) @ eigvecs.T


def _precision_sum_factor(prior_cov, hess, temperature):
    """Cholesky factorization of temperature * prior_cov^-1 + hess."""
    prior_cov = np.asarray(prior_cov, dtype=float)
    try:
        prior_factor = cho_factor(prior_cov, lower=True)
        prior_precision = cho_solve(prior_factor, np.eye(prior_cov.shape[0]))
        combined = temperature * prior_precision + hess
        combined = 0.5 * (combined + combined.T)
        return cho_factor(combined, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(
            "prior precision plus curvature is numerically singular"
        ) from exc


def guided_covariance(prior_cov, hess_pd, temperature):
    """(prior_cov^-1 + hess/temperature)^-1 via Cholesky solves.

    Computed as temperature * (temperature * prior_cov^-1 + hess)^-1, which
    stays finite for temperatures down to the underflow limit.  An exactly
    zero curvature returns the prior covariance unchanged.
    """
    prior_cov = np.asarray(prior_cov, dtype=float)
    hess_pd = np.asarray(hess_pd, dtype=float)
    if not np.any(hess_pd):
        return prior_cov.copy()
    factor = _precision_sum_factor(prior_cov, hess_pd, temperature)
    cov = temperature * cho_solve(factor, np.eye(prior_cov.shape[0]))
    return 0.5 * (cov + cov.T)


def guided_mean(prior, guided_cov, model, temperature):
    """Mean of the prior times exp(-m/temperature), for m centered at the prior mean.

    Algebraically guided_cov (prior_cov^-1 mean + (H mean - g)/temperature);
    since the model is centered at the prior mean this collapses to the
    numerically friendlier mean - guided_cov g / temperature.
    """
    if not np.allclose(model.center, prior.mean, rtol=1e-12, atol=1e-12):
        raise CenterMismatch(
            "model is expanded at %s but the prior mean is %s"
            % (model.center, prior.mean)
        )
    return prior.mean - np.asarray(guided_cov, dtype=float) @ model.grad / temperature


def guided_step(prior_cov, model, temperature):
    """Incremental form: mean shift and covariance for base covariance prior_cov.

        delta = -(temperature * prior_cov^-1 + H)^-1 g
        cov   = temperature * (temperature * prior_cov^-1 + H)^-1

    Equals (guided_mean - prior mean, guided_covariance) when the base
    covariance is the prior covariance.
    """
    prior_cov = np.asarray(prior_cov, dtype=float)
    grad = model.grad
    hess = model.hess
    if not np.any(hess):
        return -prior_cov @ grad / temperature, prior_cov.copy()
    factor = _precision_sum_factor(prior_cov, hess, temperature)
    delta = -cho_solve(factor, grad)
    cov = temperature * cho_solve(factor, np.eye(prior_cov.shape[0]))
    return delta, 0.5 * (cov + cov.T)


def ema_smooth(prev_delta, prev_cov, new_delta, new_cov, alpha_delta, alpha_sigma):
    """Exponential moving average of the guidance outputs.

    The first iteration (prev values None) initializes to the raw values,
    so the smoothed covariance is never degenerate at startup.
    """
    if prev_delta is None or prev_cov is None:
        return np.array(new_delta, dtype=float), np.array(new_cov, dtype=float)
    delta = alpha_delta * new_delta + (1.0 - alpha_delta) * prev_delta
    cov = alpha_sigma * new_cov + (1.0 - alpha_sigma) * prev_cov
    return delta, cov


def variance_floor(temperature, sigma_target_sq, kappa_max):
    """Smallest isotropic base variance keeping guided variance >= target.

    With kappa_max <= 0 guidance cannot shrink the prior, so the target
    itself suffices.  Raises FloorInfeasible when
    temperature - sigma_target_sq * kappa_max <= 0: no base variance can
    reach the target width at this temperature/curvature.
    """
    if temperature <= 0.0:
        raise ConfigInvalid("temperature must be positive")
    if sigma_target_sq <= 0.0:
        raise ConfigInvalid("sigma_target_sq must be positive")
    if kappa_max <= 0.0:
        return sigma_target_sq
    denom = temperature - sigma_target_sq * kappa_max
    if denom <= 0.0:
        raise FloorInfeasible(temperature, sigma_target_sq, kappa_max)
    return temperature * sigma_target_sq / denom


def _clamp_cov_eigenvalues(cov, floor):
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[0] >= floor:
        return cov, False
    clamped = np.maximum(eigvals, floor)
    return (eigvecs * clamped) @ eigvecs.T, True


def build_guided_prior(prior, model, cfg, state=None):
    """Full guidance pipeline for one iteration.

    Steps: center check; exact zero model short-circuits to the prior
    (guidance must be a no-op when there is nothing to guide); otherwise
    convexify the curvature, enforce the variance floor on the (isotropic)
    base covariance, take the guided step, and smooth against ``state``
    (the previous GuidedPrior, or None on the first iteration).  For
    anisotropic priors the floor is enforced post hoc by clamping the
    smoothed covariance's eigenvalues.
    """
    if not np.allclose(model.center, prior.mean, rtol=1e-12, atol=1e-12):
        raise CenterMismatch(
            "model is expanded at %s but the prior mean is %s"
            % (model.center, prior.mean)
        )
    prev_delta = state.ema_delta if state is not None else None
    prev_cov = state.ema_cov if state is not None else None

    if not np.any(model.hess) and not np.any(model.grad):
        delta_bar, cov_bar = ema_smooth(
            prev_delta, prev_cov, np.zeros(prior.dim), prior.cov.copy(),
            cfg.alpha_delta, cfg.alpha_sigma,
        )
        return GuidedPrior(
            mean=prior.mean + delta_bar,
            cov=cov_bar,
            ema_delta=delta_bar,
            ema_cov=cov_bar,
        )

    floor = cfg.hess_floor * max(1.0, float(np.abs(model.hess).max()))
    hess_pd = convexify(model.hess, floor)
    hess_clamped = bool(np.abs(hess_pd - 0.5 * (model.hess + model.hess.T)).max() > 0.0)

    base_cov = prior.cov
    sigma0_sq = None
    floor_applied = False
    infeasible = False
    isotropic = prior.is_isotropic()
    if isotropic:
        sigma0_sq = float(prior.cov[0, 0])
    if cfg.sigma_target_sq is not None and isotropic:
        kappa_max = float(np.linalg.eigvalsh(hess_pd)[-1])
        try:
            bound = variance_floor(cfg.temperature, cfg.sigma_target_sq, kappa_max)
            if sigma0_sq < bound:
                sigma0_sq = bound
                floor_applied = True
        except FloorInfeasible as exc:
            warnings.warn(
                "variance floor infeasible (%s); using the configured "
                "ceiling %.3g as base variance" % (exc, cfg.sigma0_sq_ceiling),
                GuidanceWarning,
                stacklevel=2,
            )
            sigma0_sq = cfg.sigma0_sq_ceiling
            floor_applied = True
            infeasible = True
        if floor_applied:
            base_cov = sigma0_sq * np.eye(prior.dim)

    convex_model = QuadraticModel(
        center=model.center, value=model.value, grad=model.grad, hess=hess_pd
    )
    delta, cov = guided_step(base_cov, convex_model, cfg.temperature)
    delta_bar, cov_bar = ema_smooth(
        prev_delta, prev_cov, delta, cov, cfg.alpha_delta, cfg.alpha_sigma
    )

    anisotropic_clamped = False
    if cfg.sigma_target_sq is not None and not isotropic:
        cov_bar, anisotropic_clamped = _clamp_cov_eigenvalues(
            cov_bar, cfg.sigma_target_sq
        )

    return GuidedPrior(
        mean=prior.mean + delta_bar,
        cov=cov_bar,
        ema_delta=delta_bar,
        ema_cov=cov_bar,
        hess_clamped=hess_clamped,
        variance_floor_applied=floor_applied,
        floor_infeasible=infeasible,
        anisotropic_clamped=anisotropic_clamped,
        sigma0_sq=sigma0_sq,
    )
