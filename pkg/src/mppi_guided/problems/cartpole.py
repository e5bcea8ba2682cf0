"""Cart-pole swing-up as a trajectory-optimization problem.

The decision variable is the full control sequence u (one horizontal force
per time step).  The pole is a point mass on a massless rod; the angle is
measured from upright, so the swing-up task starts hanging at theta = pi and
targets theta = 0.

Dynamics (theta from upright, D = M + m sin^2(theta)):

    xddot     = (u + m sin(theta) (L w^2 - g cos(theta))) / D
    thetaddot = (g sin(theta) - xddot cos(theta)) / L

integrated with semi-implicit Euler: velocities first, then positions with
the *updated* velocities.

Derivatives are computed three ways, all hand-derived from the step map:

* gradient  -- reverse-mode adjoint recursion (exact, O(T)),
* Hessian   -- complex-step differentiation of the adjoint gradient
               (exact to machine precision; the dynamics are holomorphic),
* Jacobian  -- forward sensitivity propagation of the residual stack,
               giving the Gauss-Newton factorization cost == 0.5 ||R(u)||^2.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigInvalid, NonFiniteState
from .base import Problem

__all__ = [
    "CartPoleSpec",
    "CartPoleSwingUp",
    "cartpole_rollout",
    "cartpole_energy",
]

_COMPLEX_STEP = 1e-20


@dataclass(frozen=True)
class CartPoleSpec:
    """Physical constants, discretization, and quadratic cost weights.

    The state layout is (cart position, pole angle, cart velocity, angular
    velocity); ``q_weights`` are the diagonal running-cost weights in that
    order, the terminal weight is ``terminal_scale`` times the running one.
    """

    cart_mass: float = 1.0
    pole_mass: float = 0.1
    pole_length: float = 2.0
    gravity: float = 9.81
    horizon: float = 2.5
    dt: float = 0.05
    state0: tuple = (0.0, np.pi, 0.0, 0.0)
    goal: tuple = (0.0, 0.0, 0.0, 0.0)
    q_weights: tuple = (1.0, 10.0, 0.1, 0.1)
    r_weight: float = 0.1
    terminal_scale: float = 100.0

    def __post_init__(self):
        if min(self.cart_mass, self.pole_mass, self.pole_length) <= 0.0:
            raise ConfigInvalid("cart-pole masses and length must be positive")
        if self.dt <= 0.0:
            raise ConfigInvalid("dt must be positive")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ConfigInvalid(
                "horizon %.6g is not an integer multiple of dt %.6g"
                % (self.horizon, self.dt)
            )
        if len(self.state0) != 4 or len(self.goal) != 4 or len(self.q_weights) != 4:
            raise ConfigInvalid("state0, goal, and q_weights must have 4 entries")
        if min(self.q_weights) < 0.0 or self.r_weight < 0.0 or self.terminal_scale < 0.0:
            raise ConfigInvalid("cost weights must be non-negative")

    @property
    def num_steps(self):
        return int(round(self.horizon / self.dt))


def _accelerations(spec, theta, omega, u):
    """Cart and pole angular accelerations; broadcasts and preserves dtype."""
    sin = np.sin(theta)
    cos = np.cos(theta)
    denom = spec.cart_mass + spec.pole_mass * sin**2
    a1 = (u + spec.pole_mass * sin * (spec.pole_length * omega**2 - spec.gravity * cos)) / denom
    a2 = (spec.gravity * sin - a1 * cos) / spec.pole_length
    return a1, a2


def _accel_partials(spec, theta, omega, u):
    """Partial derivatives of (a1, a2) w.r.t. (theta, omega, u).

    Returns (a1t, a1w, a1u, a2t, a2w, a2u); broadcasts over leading axes.
    """
    m, g, length = spec.pole_mass, spec.gravity, spec.pole_length
    sin = np.sin(theta)
    cos = np.cos(theta)
    denom = spec.cart_mass + m * sin**2
    a1, _ = _accelerations(spec, theta, omega, u)
    # numerator N1 = u + m sin(theta) (L w^2 - g cos(theta)):
    #   dN1/dtheta = m L w^2 cos(theta) - m g cos(2 theta)
    dn1_dtheta = m * length * omega**2 * cos - m * g * np.cos(2.0 * theta)
    ddenom_dtheta = m * np.sin(2.0 * theta)
    a1t = (dn1_dtheta - a1 * ddenom_dtheta) / denom
    a1w = 2.0 * m * length * omega * sin / denom
    a1u = 1.0 / denom
    a2t = (g * cos - a1t * cos + a1 * sin) / length
    a2w = -a1w * cos / length
    a2u = -a1u * cos / length
    return a1t, a1w, a1u, a2t, a2w, a2u


def _rollout_batch(spec, controls, return_accels=False):
    """Integrate a (B, T) batch of control sequences.

    Returns states of shape (B, T+1, 4); preserves complex dtype so the
    Hessian can be taken by complex-step differentiation of the gradient.
    """
    u = np.atleast_2d(np.asarray(controls))
    batch, steps = u.shape
    if steps != spec.num_steps:
        raise ConfigInvalid(
            "control sequence has %d steps, spec expects %d" % (steps, spec.num_steps)
        )
    dtype = np.result_type(u.dtype, np.float64)
    states = np.empty((batch, steps + 1, 4), dtype=dtype)
    states[:, 0, :] = np.asarray(spec.state0, dtype=dtype)
    accels = np.empty((batch, steps, 2), dtype=dtype) if return_accels else None
    dt = spec.dt
    for t in range(steps):
        pos, theta, vel, omega = (states[:, t, k] for k in range(4))
        a1, a2 = _accelerations(spec, theta, omega, u[:, t])
        if return_accels:
            accels[:, t, 0] = a1
            accels[:, t, 1] = a2
        new_vel = vel + dt * a1
        new_omega = omega + dt * a2
        states[:, t + 1, 0] = pos + dt * new_vel
        states[:, t + 1, 1] = theta + dt * new_omega
        states[:, t + 1, 2] = new_vel
        states[:, t + 1, 3] = new_omega
    finite = np.isfinite(states.view(np.float64)) if np.iscomplexobj(states) else np.isfinite(states)
    if not finite.all():
        raise NonFiniteState(
            "cart-pole rollout diverged to non-finite state; control scale is too large"
        )
    if return_accels:
        return states, accels
    return states


def cartpole_rollout(spec, controls):
    """Roll out a single control sequence; returns (T+1, 4) state trajectory."""
    controls = np.asarray(controls, dtype=float)
    if controls.ndim != 1:
        raise ConfigInvalid("controls must be a 1-D force sequence")
    return _rollout_batch(spec, controls[None, :])[0]


def cartpole_energy(spec, state):
    """Total mechanical energy of one state (kinetic + pole potential).

    Zero potential at the pivot height; conserved by the continuous-time
    model when no force is applied.
    """
    _, theta, vel, omega = np.asarray(state, dtype=float)
    m_all = spec.cart_mass + spec.pole_mass
    m, length = spec.pole_mass, spec.pole_length
    kinetic = (
        0.5 * m_all * vel**2
        + m * length * vel * omega * np.cos(theta)
        + 0.5 * m * length**2 * omega**2
    )
    potential = m * spec.gravity * length * np.cos(theta)
    return float(kinetic + potential)


def _cost_from_states(spec, states, controls):
    """Quadratic trajectory cost; batched, dtype-preserving.

    cost = 0.5 sum_{t=1}^{T-1} (s_t-goal)' Q (s_t-goal)
         + 0.5 (s_T-goal)' Q_T (s_T-goal) + 0.5 r sum_t u_t^2
    """
    q = np.asarray(spec.q_weights)
    goal = np.asarray(spec.goal)
    err = states - goal
    running = 0.5 * np.sum(err[:, 1:-1, :] ** 2 * q, axis=(1, 2))
    terminal = 0.5 * spec.terminal_scale * np.sum(err[:, -1, :] ** 2 * q, axis=1)
    control = 0.5 * spec.r_weight * np.sum(controls**2, axis=1)
    return running + terminal + control


def _cost_grad_batch(spec, controls):
    """Adjoint (reverse-mode) gradient of the trajectory cost; batched.

    Preserves complex dtype, which is what makes the complex-step Hessian
    exact: every operation in the rollout and this recursion is holomorphic.
    """
    u = np.atleast_2d(np.asarray(controls))
    states, accels = _rollout_batch(spec, u, return_accels=True)
    steps = spec.num_steps
    dt = spec.dt
    q = np.asarray(spec.q_weights)
    goal = np.asarray(spec.goal)
    grad = np.empty_like(u, dtype=states.dtype)
    # lam = dJ/ds_t holding u fixed; seeded at the terminal state.
    lam = spec.terminal_scale * q * (states[:, -1, :] - goal)
    for t in range(steps - 1, -1, -1):
        theta = states[:, t, 1]
        omega = states[:, t, 3]
        a1t, a1w, a1u, a2t, a2w, a2u = _accel_partials(spec, theta, omega, u[:, t])
        lp, lth, lv, lw = lam[:, 0], lam[:, 1], lam[:, 2], lam[:, 3]
        grad[:, t] = spec.r_weight * u[:, t] + (
            dt**2 * a1u * lp + dt**2 * a2u * lth + dt * a1u * lv + dt * a2u * lw
        )
        # lam <- dc_t/ds_t + (ds_{t+1}/ds_t)' lam, rows of the step Jacobian
        # written out by hand (positions pick up dt^2 terms because the
        # semi-implicit update uses the new velocities).
        new_lam = np.empty_like(lam)
        new_lam[:, 0] = lp
        new_lam[:, 1] = (
            dt**2 * a1t * lp + (1.0 + dt**2 * a2t) * lth + dt * a1t * lv + dt * a2t * lw
        )
        new_lam[:, 2] = dt * lp + lv
        new_lam[:, 3] = (
            dt**2 * a1w * lp
            + dt * (1.0 + dt * a2w) * lth
            + dt * a1w * lv
            + (1.0 + dt * a2w) * lw
        )
        if t >= 1:
            new_lam += q * (states[:, t, :] - goal)
        lam = new_lam
    return grad


def _step_jacobians(spec, theta, omega, u):
    """Single-step Jacobians (ds_{t+1}/ds_t, ds_{t+1}/du_t) as dense arrays."""
    dt = spec.dt
    a1t, a1w, a1u, a2t, a2w, a2u = _accel_partials(spec, theta, omega, u)
    f_s = np.array(
        [
            [1.0, dt**2 * a1t, dt, dt**2 * a1w],
            [0.0, 1.0 + dt**2 * a2t, 0.0, dt * (1.0 + dt * a2w)],
            [0.0, dt * a1t, 1.0, dt * a1w],
            [0.0, dt * a2t, 0.0, 1.0 + dt * a2w],
        ]
    )
    f_u = np.array([dt**2 * a1u, dt**2 * a2u, dt * a1u, dt * a2u])
    return f_s, f_u


class CartPoleSwingUp(Problem):
    """Swing-up trajectory cost as a function of the control sequence.

    Exposes exact first- and second-order information (``grad``, ``hess``)
    plus the residual stack whose half squared norm reproduces the cost
    (``residual``, ``jacobian``), so every model provider can run on it.
    """

    def __init__(self, spec=None):
        self.spec = spec if spec is not None else CartPoleSpec()
        super().__init__(dim=self.spec.num_steps, name="cartpole_swingup")
        self.known_optimum = None
        self.known_min_value = None
        self.default_start = np.zeros(self.dim)

    def cost(self, x):
        u = self.check_dim(x)
        states = _rollout_batch(self.spec, u[None, :])
        return float(_cost_from_states(self.spec, states, u[None, :])[0])

    def cost_batch(self, points):
        u = np.atleast_2d(np.asarray(points, dtype=float))
        states = _rollout_batch(self.spec, u)
        return _cost_from_states(self.spec, states, u)

    def grad(self, x):
        u = self.check_dim(x)
        return np.real(_cost_grad_batch(self.spec, u[None, :])[0])

    def hess(self, x):
        u = self.check_dim(x)
        h = _COMPLEX_STEP
        perturbed = u[None, :] + 1j * h * np.eye(self.dim)
        grads = _cost_grad_batch(self.spec, perturbed)
        hess = grads.imag.T / h
        return 0.5 * (hess + hess.T)

    def residual(self, x):
        u = self.check_dim(x)
        spec = self.spec
        states = _rollout_batch(spec, u[None, :])[0]
        goal = np.asarray(spec.goal)
        sqrt_q = np.sqrt(np.asarray(spec.q_weights))
        sqrt_qt = np.sqrt(spec.terminal_scale) * sqrt_q
        blocks = [(sqrt_q * (states[1:-1, :] - goal)).ravel()]
        blocks.append(sqrt_qt * (states[-1, :] - goal))
        blocks.append(np.sqrt(spec.r_weight) * u)
        return np.concatenate(blocks)

    def jacobian(self, x):
        u = self.check_dim(x)
        spec = self.spec
        steps = spec.num_steps
        states = _rollout_batch(spec, u[None, :])[0]
        sqrt_q = np.sqrt(np.asarray(spec.q_weights))
        sqrt_qt = np.sqrt(spec.terminal_scale) * sqrt_q
        # Forward sensitivities: S_{t+1} = f_s S_t + f_u e_t'.
        sens = np.zeros((4, steps))
        rows = []
        for t in range(steps):
            f_s, f_u = _step_jacobians(spec, states[t, 1], states[t, 3], u[t])
            sens = f_s @ sens
            sens[:, t] += f_u
            if 1 <= t + 1 <= steps - 1:
                rows.append(sqrt_q[:, None] * sens)
        rows.append(sqrt_qt[:, None] * sens)
        rows.append(np.sqrt(spec.r_weight) * np.eye(steps))
        return np.concatenate(rows, axis=0)

    def energy(self, state):
        return cartpole_energy(self.spec, state)
