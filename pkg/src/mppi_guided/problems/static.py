"""Closed-form benchmark objectives with analytic derivatives.

Every problem here exposes:

* ``cost`` / ``cost_batch``  -- the objective itself (vectorized where cheap),
* ``grad`` / ``hess``        -- hand-derived analytic derivatives,
* ``known_optimum`` / ``known_min_value`` -- the global minimizer, used by
  convergence checks and by tests that pin the analytic derivatives against
  finite differences.

Problems that decompose naturally as a sum of squares also expose
``residual`` / ``jacobian`` with the convention ``cost(x) == 0.5 * ||residual(x)||^2``.
"""

import numpy as np

from ..exceptions import ConfigInvalid
from .base import Problem

__all__ = [
    "Rosenbrock",
    "StyblinskiTang",
    "Rastrigin",
    "Ackley",
    "SinusoidConvex1D",
    "NarrowValley2D",
    "make_static",
]

# Stationary points refined offline with Newton's method to float64 precision.
_STYBLINSKI_TANG_XSTAR = -2.903534027771177
_STYBLINSKI_TANG_FSTAR_PER_DIM = -39.16616570377141
_SINUSOID_XSTAR = -0.19332848911006148
_SINUSOID_FSTAR = -0.9810200057494938


class Rosenbrock(Problem):
    """Chained Rosenbrock valley: f(x) = sum (1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2.

    The global minimum sits at (1, ..., 1) with value 0.  The sum-of-squares
    structure is exposed through ``residual``/``jacobian`` (scaled by sqrt(2)
    so that cost == 0.5 * ||R||^2 holds exactly).
    """

    def __init__(self, dim=2):
        if dim < 2:
            raise ConfigInvalid("Rosenbrock requires dim >= 2, got %d" % dim)
        super().__init__(dim=dim, name="rosenbrock")
        self.known_optimum = np.ones(dim)
        self.known_min_value = 0.0
        self.default_start = np.zeros(dim)

    def cost(self, x):
        x = self.check_dim(x)
        return float(np.sum((1.0 - x[:-1]) ** 2 + 100.0 * (x[1:] - x[:-1] ** 2) ** 2))

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a = pts[:, :-1]
        b = pts[:, 1:]
        return np.sum((1.0 - a) ** 2 + 100.0 * (b - a**2) ** 2, axis=1)

    def grad(self, x):
        x = self.check_dim(x)
        g = np.zeros(self.dim)
        # d/dx_i of the i-th pair: -2(1 - x_i) - 400 x_i (x_{i+1} - x_i^2)
        g[:-1] += -2.0 * (1.0 - x[:-1]) - 400.0 * x[:-1] * (x[1:] - x[:-1] ** 2)
        # d/dx_{i+1} of the i-th pair: 200 (x_{i+1} - x_i^2)
        g[1:] += 200.0 * (x[1:] - x[:-1] ** 2)
        return g

    def hess(self, x):
        x = self.check_dim(x)
        h = np.zeros((self.dim, self.dim))
        i = np.arange(self.dim - 1)
        h[i, i] += 2.0 + 1200.0 * x[:-1] ** 2 - 400.0 * x[1:]
        h[i + 1, i + 1] += 200.0
        h[i, i + 1] += -400.0 * x[:-1]
        h[i + 1, i] += -400.0 * x[:-1]
        return h

    def residual(self, x):
        x = self.check_dim(x)
        root2 = np.sqrt(2.0)
        return np.concatenate(
            [root2 * (1.0 - x[:-1]), root2 * 10.0 * (x[1:] - x[:-1] ** 2)]
        )

    def jacobian(self, x):
        x = self.check_dim(x)
        m = self.dim - 1
        jac = np.zeros((2 * m, self.dim))
        root2 = np.sqrt(2.0)
        i = np.arange(m)
        jac[i, i] = -root2
        jac[m + i, i] = -root2 * 20.0 * x[:-1]
        jac[m + i, i + 1] = root2 * 10.0
        return jac


class StyblinskiTang(Problem):
    """Separable quartic: f(x) = 0.5 * sum (x_i^4 - 16 x_i^2 + 5 x_i).

    Each coordinate has a global minimum near -2.9035 and a shallower local
    minimum near +2.75, making a 2^d multimodal landscape.
    """

    def __init__(self, dim=2):
        super().__init__(dim=dim, name="styblinski_tang")
        self.known_optimum = np.full(dim, _STYBLINSKI_TANG_XSTAR)
        self.known_min_value = dim * _STYBLINSKI_TANG_FSTAR_PER_DIM
        self.default_start = np.zeros(dim)

    def cost(self, x):
        x = self.check_dim(x)
        return float(0.5 * np.sum(x**4 - 16.0 * x**2 + 5.0 * x))

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return 0.5 * np.sum(pts**4 - 16.0 * pts**2 + 5.0 * pts, axis=1)

    def grad(self, x):
        x = self.check_dim(x)
        return 2.0 * x**3 - 16.0 * x + 2.5

    def hess(self, x):
        x = self.check_dim(x)
        return np.diag(6.0 * x**2 - 16.0)


class Rastrigin(Problem):
    """Rastrigin function: f(x) = A d + sum (x_i^2 - A cos(2 pi x_i)), A = 10.

    A quadratic bowl overlaid with a dense grid of local minima; the analytic
    Hessian oscillates between strongly positive and strongly negative
    curvature on a length scale of one.
    """

    AMPLITUDE = 10.0

    def __init__(self, dim=2):
        super().__init__(dim=dim, name="rastrigin")
        self.known_optimum = np.zeros(dim)
        self.known_min_value = 0.0
        self.default_start = np.full(dim, 1.9) if dim != 2 else np.array([1.9, 1.7])

    def cost(self, x):
        x = self.check_dim(x)
        a = self.AMPLITUDE
        return float(a * self.dim + np.sum(x**2 - a * np.cos(2.0 * np.pi * x)))

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a = self.AMPLITUDE
        return a * pts.shape[1] + np.sum(pts**2 - a * np.cos(2.0 * np.pi * pts), axis=1)

    def grad(self, x):
        x = self.check_dim(x)
        return 2.0 * x + 2.0 * np.pi * self.AMPLITUDE * np.sin(2.0 * np.pi * x)

    def hess(self, x):
        x = self.check_dim(x)
        return np.diag(2.0 + 4.0 * np.pi**2 * self.AMPLITUDE * np.cos(2.0 * np.pi * x))


class Ackley(Problem):
    """Ackley function with the standard constants a=20, b=0.2, c=2*pi.

    Written as a*(1 - exp(-b*s)) + (e - exp(m)) with s = ||x||/sqrt(d) and
    m = mean(cos(c x)) so the value at the origin is exactly zero.  The
    exponential-of-norm term has a conical kink at x = 0, so ``grad``/``hess``
    are only defined away from the origin; at the origin the gradient is
    reported as zero (the symmetric subgradient) and the Hessian falls back
    to the curvature of the cosine term alone.
    """

    A = 20.0
    B = 0.2
    C = 2.0 * np.pi

    def __init__(self, dim=2):
        super().__init__(dim=dim, name="ackley")
        self.known_optimum = np.zeros(dim)
        self.known_min_value = 0.0
        self.default_start = np.full(dim, 2.0)

    def cost(self, x):
        x = self.check_dim(x)
        s = np.linalg.norm(x) / np.sqrt(self.dim)
        m = np.mean(np.cos(self.C * x))
        return float(self.A * (1.0 - np.exp(-self.B * s)) + (np.e - np.exp(m)))

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        s = np.linalg.norm(pts, axis=1) / np.sqrt(pts.shape[1])
        m = np.mean(np.cos(self.C * pts), axis=1)
        return self.A * (1.0 - np.exp(-self.B * s)) + (np.e - np.exp(m))

    def grad(self, x):
        x = self.check_dim(x)
        d = self.dim
        s = np.linalg.norm(x) / np.sqrt(d)
        m = np.mean(np.cos(self.C * x))
        g = (self.C / d) * np.exp(m) * np.sin(self.C * x)
        if s > 0.0:
            g += (self.A * self.B / d) * np.exp(-self.B * s) * x / s
        return g

    def hess(self, x):
        x = self.check_dim(x)
        d = self.dim
        s = np.linalg.norm(x) / np.sqrt(d)
        m = np.mean(np.cos(self.C * x))
        c, em = self.C, np.exp(m)
        sin_cx = np.sin(self.C * x)
        cos_cx = np.cos(self.C * x)
        # Cosine term: grad = (c/d) e^m sin(cx); differentiate the product.
        h = (c / d) ** 2 * em * np.outer(sin_cx, -sin_cx)
        h += np.diag((c**2 / d) * em * cos_cx)
        if s > 0.0:
            # Norm term: grad = (A b / d) e^{-b s} x / s with s = ||x||/sqrt(d).
            u = x / (s * d)  # = ds/dx
            ebs = np.exp(-self.B * s)
            h += (self.A * self.B / d) * ebs * (np.eye(d) / s - np.outer(x, x) / (s**3 * d))
            h += (self.A * self.B / d) * (-self.B) * ebs * np.outer(x / s, u)
        return h


class SinusoidConvex1D(Problem):
    """One-dimensional f(x) = a x^2 + b sin(w x) with a=0.5, b=1, w=8.

    A convex parabola with a fast sinusoidal ripple: many local minima, one
    global minimum near -0.193.  ``smoothed_cost`` evaluates the Gaussian
    convolution E[f(x + z)], z ~ N(0, sigma^2), in closed form:
    a (x^2 + sigma^2) + b exp(-w^2 sigma^2 / 2) sin(w x).
    """

    def __init__(self, a=0.5, b=1.0, omega=8.0):
        super().__init__(dim=1, name="sinusoid_convex_1d")
        self.a = float(a)
        self.b = float(b)
        self.omega = float(omega)
        if (a, b, omega) == (0.5, 1.0, 8.0):
            self.known_optimum = np.array([_SINUSOID_XSTAR])
            self.known_min_value = _SINUSOID_FSTAR
        else:
            self.known_optimum = None
            self.known_min_value = None
        self.default_start = np.array([2.0])

    def cost(self, x):
        x = self.check_dim(x)
        return float(self.a * x[0] ** 2 + self.b * np.sin(self.omega * x[0]))

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.a * pts[:, 0] ** 2 + self.b * np.sin(self.omega * pts[:, 0])

    def grad(self, x):
        x = self.check_dim(x)
        return np.array([2.0 * self.a * x[0] + self.b * self.omega * np.cos(self.omega * x[0])])

    def hess(self, x):
        x = self.check_dim(x)
        return np.array([[2.0 * self.a - self.b * self.omega**2 * np.sin(self.omega * x[0])]])

    def smoothed_cost(self, x, sigma):
        """Gaussian-smoothed objective E_{z~N(0,sigma^2)}[f(x+z)], closed form."""
        x = self.check_dim(x)
        damp = np.exp(-0.5 * (self.omega * sigma) ** 2)
        return float(
            self.a * (x[0] ** 2 + sigma**2) + self.b * damp * np.sin(self.omega * x[0])
        )


class NarrowValley2D(Problem):
    """Ill-conditioned valley f(x, y) = x^2 + c (y - x^2)^2 with c = 50.

    Smooth and unimodal but with a curved, narrow valley floor; the Hessian
    condition number at the default start (-1, 1) is about 1.3e3.
    """

    def __init__(self, c=50.0):
        super().__init__(dim=2, name="narrow_valley_2d")
        self.c = float(c)
        self.known_optimum = np.zeros(2)
        self.known_min_value = 0.0
        self.default_start = np.array([-1.0, 1.0])

    def cost(self, x):
        x = self.check_dim(x)
        return float(x[0] ** 2 + self.c * (x[1] - x[0] ** 2) ** 2)

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts[:, 0] ** 2 + self.c * (pts[:, 1] - pts[:, 0] ** 2) ** 2

    def grad(self, x):
        x = self.check_dim(x)
        v = x[1] - x[0] ** 2
        return np.array([2.0 * x[0] - 4.0 * self.c * x[0] * v, 2.0 * self.c * v])

    def hess(self, x):
        x = self.check_dim(x)
        v = x[1] - x[0] ** 2
        return np.array(
            [
                [2.0 - 4.0 * self.c * v + 8.0 * self.c * x[0] ** 2, -4.0 * self.c * x[0]],
                [-4.0 * self.c * x[0], 2.0 * self.c],
            ]
        )

    def residual(self, x):
        x = self.check_dim(x)
        return np.array(
            [np.sqrt(2.0) * x[0], np.sqrt(2.0 * self.c) * (x[1] - x[0] ** 2)]
        )

    def jacobian(self, x):
        x = self.check_dim(x)
        return np.array(
            [
                [np.sqrt(2.0), 0.0],
                [-2.0 * np.sqrt(2.0 * self.c) * x[0], np.sqrt(2.0 * self.c)],
            ]
        )


_STATIC_REGISTRY = {
    "rosenbrock": Rosenbrock,
    "styblinski_tang": StyblinskiTang,
    "rastrigin": Rastrigin,
    "ackley": Ackley,
    "sinusoid_convex_1d": SinusoidConvex1D,
    "narrow_valley_2d": NarrowValley2D,
}


def make_static(kind, dim=None):
    """Construct a benchmark problem by name.

    Args:
        kind: one of ``rosenbrock``, ``styblinski_tang``, ``rastrigin``,
            ``ackley``, ``sinusoid_convex_1d``, ``narrow_valley_2d``.
        dim: dimension for the problems that support it; ``None`` keeps the
            problem's default.

    Raises:
        ConfigInvalid: if ``kind`` is unknown or ``dim`` is not supported.
    """
    key = str(kind).lower()
    if key not in _STATIC_REGISTRY:
        raise ConfigInvalid(
            "unknown static problem %r (choose from %s)"
            % (kind, ", ".join(sorted(_STATIC_REGISTRY)))
        )
    cls = _STATIC_REGISTRY[key]
    if dim is None:
        return cls()
    if key in ("sinusoid_convex_1d",):
        if dim != 1:
            raise ConfigInvalid("%s is one-dimensional" % key)
        return cls()
    if key in ("narrow_valley_2d",):
        if dim != 2:
            raise ConfigInvalid("%s is two-dimensional" % key)
        return cls()
    return cls(dim=dim)
