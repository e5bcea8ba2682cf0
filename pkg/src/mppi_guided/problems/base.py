"""Objective-function interface and evaluation-counting wrapper."""

from __future__ import annotations

import numpy as np

from ..exceptions import CapabilityMissing, DimensionMismatch

__all__ = ["Problem", "CountingProblem", "has_capability", "finite_diff_grad", "finite_diff_hess"]


class Problem:
    """An objective f over R^d with optional derivative/residual capabilities.

    Subclasses must set ``dim`` and implement ``cost``.  The optional
    capabilities raise CapabilityMissing by default:

    * ``grad`` / ``hess`` — analytic first/second derivatives,
    * ``residual`` / ``jacobian`` — a vector R(x) with cost(x) = 0.5*||R(x)||^2
      and its Jacobian, for Gauss-Newton models.

    Evaluations must be pure; anything stateful (counters) belongs in a
    wrapper, not here.
    """

    dim: int
    name: str = "problem"

    def __init__(self, dim: int, name: str = "problem"):
        self.dim = int(dim)
        self.name = str(name)

    def cost(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def cost_batch(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized cost over rows of xs; default falls back to a loop."""
        return np.array([self.cost(x) for x in np.asarray(xs, dtype=float)])

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise CapabilityMissing(f"{self.name} does not provide gradients")

    def hess(self, x: np.ndarray) -> np.ndarray:
        raise CapabilityMissing(f"{self.name} does not provide Hessians")

    def residual(self, x: np.ndarray) -> np.ndarray:
        raise CapabilityMissing(f"{self.name} does not provide residual vectors")

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        raise CapabilityMissing(f"{self.name} does not provide residual Jacobians")

    def check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"{self.name} expects dimension {self.dim}, got shape {x.shape}")
        return x


def has_capability(problem: Problem, capability: str) -> bool:
    """True when the problem overrides the given optional method."""
    return getattr(type(problem), capability, None) is not getattr(Problem, capability, None)


class CountingProblem(Problem):
    """Transparent wrapper that counts objective evaluations.

    Only ``cost``/``cost_batch`` calls increment the counter (one per point);
    derivative and residual calls are tracked separately so tests can assert
    the exact per-iteration evaluation budget.
    """

    def __init__(self, inner: Problem):
        self.inner = inner
        self.dim = inner.dim
        self.name = inner.name
        self.cost_evals = 0
        self.grad_evals = 0
        self.hess_evals = 0
        self.residual_evals = 0

    def cost(self, x):
        self.cost_evals += 1
        return self.inner.cost(x)

    def cost_batch(self, xs):
        xs = np.asarray(xs, dtype=float)
        self.cost_evals += xs.shape[0]
        return self.inner.cost_batch(xs)

    def grad(self, x):
        self.grad_evals += 1
        return self.inner.grad(x)

    def hess(self, x):
        self.hess_evals += 1
        return self.inner.hess(x)

    def residual(self, x):
        self.residual_evals += 1
        return self.inner.residual(x)

    def jacobian(self, x):
        return self.inner.jacobian(x)


def _fd_steps(x: np.ndarray) -> np.ndarray:
    # cbrt(machine eps) balances truncation and roundoff for central differences
    return np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(x))


def finite_diff_grad(f, x: np.ndarray) -> np.ndarray:
    """Central-difference gradient; the package-wide derivative oracle."""
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2 * h[i])
    return g


def finite_diff_hess(grad, x: np.ndarray) -> np.ndarray:
    """Central differences of a gradient function, symmetrized."""
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    d = x.size
    H = np.empty((d, d))
    for i in range(d):
        e = np.zeros_like(x)
        e[i] = h[i]
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h[i])
    return 0.5 * (H + H.T)
