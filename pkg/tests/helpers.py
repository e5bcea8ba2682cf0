"""Small synthetic objectives shared across the test modules."""

import numpy as np

from mppi_guided.problems import Problem


class QuadraticProblem(Problem):
    """f(x) = 0.5 (x - b)' A (x - b) + c with a symmetric positive A."""

    def __init__(self, a, b, c=0.0, name="quadratic"):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        super().__init__(dim=b.size, name=name)
        self.a = 0.5 * (a + a.T)
        self.b = b
        self.c = float(c)
        self.known_optimum = b.copy()
        self.known_min_value = self.c
        self.default_start = np.zeros(b.size)

    def cost(self, x):
        d = self.check_dim(x) - self.b
        return float(0.5 * d @ self.a @ d + self.c)

    def cost_batch(self, points):
        d = np.atleast_2d(np.asarray(points, dtype=float)) - self.b
        return 0.5 * np.sum((d @ self.a) * d, axis=1) + self.c

    def grad(self, x):
        return self.a @ (self.check_dim(x) - self.b)

    def hess(self, x):
        self.check_dim(x)
        return self.a.copy()


class LinearProblem(Problem):
    """f(x) = a . x; zero curvature everywhere."""

    def __init__(self, a):
        a = np.asarray(a, dtype=float)
        super().__init__(dim=a.size, name="linear")
        self.a = a
        self.default_start = np.zeros(a.size)

    def cost(self, x):
        return float(self.a @ self.check_dim(x))

    def cost_batch(self, points):
        return np.atleast_2d(np.asarray(points, dtype=float)) @ self.a

    def grad(self, x):
        self.check_dim(x)
        return self.a.copy()

    def hess(self, x):
        self.check_dim(x)
        return np.zeros((self.dim, self.dim))


class ConstantProblem(Problem):
    """f(x) = value everywhere."""

    def __init__(self, dim=2, value=3.0):
        super().__init__(dim=dim, name="constant")
        self.value = float(value)
        self.default_start = np.zeros(dim)

    def cost(self, x):
        self.check_dim(x)
        return self.value

    def cost_batch(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.full(pts.shape[0], self.value)


class IdentityResidualProblem(Problem):
    """f(x) = 0.5 ||x||^2 exposed through its residual R(x) = x."""

    def __init__(self, dim=3):
        super().__init__(dim=dim, name="identity_residual")
        self.default_start = np.zeros(dim)

    def cost(self, x):
        x = self.check_dim(x)
        return float(0.5 * x @ x)

    def residual(self, x):
        return self.check_dim(x).copy()

    def jacobian(self, x):
        self.check_dim(x)
        return np.eye(self.dim)


class LinearResidualProblem(Problem):
    """f(x) = 0.5 ||Ax - b||^2; Gauss-Newton is exact here."""

    def __init__(self, a, b):
        a = np.asarray(a, dtype=float)
        super().__init__(dim=a.shape[1], name="linear_residual")
        self.a = a
        self.b = np.asarray(b, dtype=float)
        self.default_start = np.zeros(a.shape[1])

    def cost(self, x):
        r = self.residual(x)
        return float(0.5 * r @ r)

    def grad(self, x):
        return self.a.T @ self.residual(x)

    def hess(self, x):
        self.check_dim(x)
        return self.a.T @ self.a

    def residual(self, x):
        return self.a @ self.check_dim(x) - self.b

    def jacobian(self, x):
        self.check_dim(x)
        return self.a.copy()


def rel_err(actual, expected):
    """Infinity-norm relative error with a unit floor on the denominator."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(1.0, float(np.abs(expected).max()))
    return float(np.abs(actual - expected).max()) / scale
