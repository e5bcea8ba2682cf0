"""Foundational numeric types, Boltzmann weighting, and sampling diagnostics.

All types are immutable value objects; every function here is pure given its
inputs (sampling takes an explicit generator), so everything is safe to share
across threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    CholeskyFailure,
    DegenerateBatch,
    EmptyBatch,
    LengthMismatch,
    NaNCost,
    NonPositiveTemperature,
)

__all__ = [
    "GaussianParams",
    "WeightVector",
    "SampleBatch",
    "boltzmann_weights",
    "weighted_mean",
    "effective_sample_size",
    "sample_gaussian",
    "child_rng",
]


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise LengthMismatch(f"expected a 1-d vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class GaussianParams:
    """Mean and full covariance of a Gaussian sampling distribution.

    The covariance must be symmetric (1e-12 relative tolerance) and
    positive-definite; both are checked at construction via a Cholesky
    attempt, and the factor is cached for sampling.
    """

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = _as_vector(self.mean)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise LengthMismatch(
                f"cov shape {cov.shape} does not match mean dimension {mean.size}"
            )
        asym = np.max(np.abs(cov - cov.T))
        scale = max(np.max(np.abs(cov)), 1e-300)
        if asym > 1e-12 * scale:
            raise CholeskyFailure(f"covariance not symmetric: max asymmetry {asym:g}")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure("covariance is not positive-definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.size

    @classmethod
    def isotropic(cls, mean, sigma_sq: float) -> "GaussianParams":
        mean = _as_vector(mean)
        return cls(mean, sigma_sq * np.eye(mean.size))

    def is_isotropic(self, rtol: float = 1e-12) -> bool:
        s = self.cov[0, 0]
        return bool(np.all(np.abs(self.cov - s * np.eye(self.dim)) <= rtol * max(abs(s), 1e-300)))


@dataclass(frozen=True)
class WeightVector:
    """Normalized, nonnegative importance weights (sum to 1 within 1e-10)."""

    weights: np.ndarray

    def __post_init__(self):
        w = _as_vector(self.weights)
        if w.size == 0:
            raise EmptyBatch("weight vector is empty")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DegenerateBatch("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise DegenerateBatch(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class SampleBatch:
    """N candidate points with their scalar costs.

    Costs may be +inf (treated as maximal cost) but never NaN.
    """

    points: np.ndarray  # (N, d)
    costs: np.ndarray  # (N,)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise LengthMismatch(f"points must be (N, d), got shape {pts.shape}")
        costs = _as_vector(self.costs)
        if pts.shape[0] != costs.size:
            raise LengthMismatch(
                f"{pts.shape[0]} points but {costs.size} costs"
            )
        if costs.size < 1:
            raise EmptyBatch("sample batch is empty")
        if np.any(np.isnan(costs)):
            raise NaNCost("sample batch contains NaN costs")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "costs", costs)

    def __len__(self) -> int:
        return self.costs.size


def boltzmann_weights(costs, temperature: float) -> WeightVector:
    """Softmax of -costs/temperature, computed with max-subtraction.

    w_i is proportional to exp(-costs_i / temperature); infinite costs get
    exactly zero weight.  Invariant under adding a constant to all costs.
    """
    if temperature <= 0 or not np.isfinite(temperature):
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature!r}")
    c = _as_vector(costs)
    if c.size == 0:
        raise EmptyBatch("cannot weight an empty cost batch")
    if np.any(np.isnan(c)):
        raise NaNCost("cost batch contains NaN")
    finite = np.isfinite(c)
    if not np.any(finite):
        raise DegenerateBatch("all costs are infinite; every weight would be zero")
    logits = np.where(finite, -(c - c[finite].min()) / temperature, -np.inf)
    w = np.exp(logits)
    return WeightVector(w / w.sum())


def weighted_mean(batch: SampleBatch, weights: WeightVector) -> np.ndarray:
    """Convex combination of the batch points: sum_i w_i * x_i."""
    if len(batch) != len(weights):
        raise LengthMismatch(
            f"batch has {len(batch)} samples but weights has {len(weights)}"
        )
    return weights.weights @ batch.points


def effective_sample_size(weights: WeightVector) -> float:
    """ESS = 1 / sum_i w_i^2; lies in [1, N]."""
    return float(1.0 / np.sum(weights.weights**2))


def sample_gaussian(params: GaussianParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n i.i.d. points from N(mean, cov) via the cached Cholesky factor.

    Deterministic given the generator state: draws standard normals of shape
    (n, d) and applies the affine transform, so for a fixed seed the first
    min(n, n') rows coincide across different batch sizes.
    """
    if n < 1:
        raise EmptyBatch(f"need at least one sample, got n={n}")
    z = rng.standard_normal((n, params.dim))
    return params.mean + z @ params.chol.T


def child_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Derive an independent generator from (master seed, index path).

    Streams are keyed by their path, not by draw order, so changing how many
    numbers one iteration consumes never reshuffles any other iteration.
    """
    mask = 0xFFFFFFFFFFFFFFFF  # SeedSequence entropy words must be non-negative
    words = (int(master_seed) & mask,) + tuple(int(p) & mask for p in path)
    return np.random.default_rng(np.random.SeedSequence(words))
