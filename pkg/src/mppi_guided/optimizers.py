"""Iteration loops: guided and vanilla sampling, CEM, and a Newton reference.

The guided loop per iteration: build a quadratic surrogate at the current
mean, fold it into the sampling distribution (guidance module), draw N
samples, weight them by the Boltzmann factor of the *residual*
f(x) - m(x) — the part of the objective the surrogate does not explain —
and move the mean to the weighted average.  When the surrogate is exact,
residuals vanish, weights are uniform, and the mean lands on the guided
(prior-blended Newton) point regardless of N; that is the mechanism behind
sample-budget invariance.

Vanilla sampling is the same loop with no surrogate: fixed Gaussian,
weights on raw costs.  A zero surrogate reduces guided to vanilla
(identical draws per seed; weights agree because the Boltzmann transform
is shift-invariant).

RNG discipline: each iteration derives two child generators from
(seed, iteration) — stream 0 for model construction noise, stream 1 for
sampling — so runs with different N share the model noise and differ only
in the sample set.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    GaussianParams,
    SampleBatch,
    boltzmann_weights,
    child_rng,
    effective_sample_size,
    sample_gaussian,
    weighted_mean,
)
from .exceptions import (
    CapabilityMissing,
    ConfigInvalid,
    DegenerateBatch,
    NonFiniteState,
)
from .guidance import GuidanceConfig, build_guided_prior, convexify
from .models import ModelProvider, RandomizedSmoothingProvider, make_provider
from .problems.base import CountingProblem, finite_diff_hess, has_capability

__all__ = [
    "StopRule",
    "OptimizerConfig",
    "RunRow",
    "RunRecord",
    "GuidedIterState",
    "guided_mppi_step",
    "vanilla_mppi_step",
    "cem_step",
    "newton_reference",
    "run",
    "OPTIMIZER_KINDS",
]

OPTIMIZER_KINDS = ("guided", "vanilla", "cem")


@dataclass(frozen=True)
class StopRule:
    """Early-termination test checked after every iteration.

    ``target``/``target_tol``: stop when the infinity-norm distance between
    the mean and the target drops below the tolerance.  ``grad_tol``: stop
    on small analytic gradient (only for problems that expose one).  With
    neither set, the run simply exhausts max_iters.
    """

    target: np.ndarray = None
    target_tol: float = 0.05
    grad_tol: float = None

    def __post_init__(self):
        if self.target is not None:
            object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
        if self.target_tol <= 0.0:
            raise ConfigInvalid("target_tol must be positive")
        if self.grad_tol is not None and self.grad_tol <= 0.0:
            raise ConfigInvalid("grad_tol must be positive")

    def satisfied(self, mean, problem):
        if self.target is not None:
            if float(np.abs(mean - self.target).max()) < self.target_tol:
                return True
        if self.grad_tol is not None and has_capability(problem, "grad"):
            if float(np.abs(problem.grad(mean)).max()) < self.grad_tol:
                return True
        return False


@dataclass(frozen=True)
class OptimizerConfig:
    """Everything one `run` needs besides the problem itself.

    ``provider`` may be a ModelProvider instance, a provider name, or None
    (required only for the guided optimizer).  ``init_mean`` of None falls
    back to the problem's default start; the initial covariance is
    isotropic ``init_sigma_sq``.  ``formulation`` selects whether guidance
    state is smoothed across iterations ("incremental") or rebuilt from
    scratch each iteration ("full").
    """

    num_samples: int = 64
    max_iters: int = 100
    seed: int = 0
    init_mean: np.ndarray = None
    init_sigma_sq: float = 0.04
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    provider: object = None
    formulation: str = "incremental"
    stop: StopRule = field(default_factory=StopRule)
    elite_frac: float = 0.1
    alpha_cem: float = 0.9
    cem_jitter: float = 1e-9

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigInvalid("num_samples must be at least 1")
        if self.max_iters < 0:
            raise ConfigInvalid("max_iters must be non-negative")
        if self.init_sigma_sq <= 0.0:
            raise ConfigInvalid("init_sigma_sq must be positive")
        if self.formulation not in ("incremental", "full"):
            raise ConfigInvalid("formulation must be 'incremental' or 'full'")
        if not 0.0 < self.elite_frac <= 1.0:
            raise ConfigInvalid("elite_frac must lie in (0, 1]")
        if not 0.0 < self.alpha_cem <= 1.0:
            raise ConfigInvalid("alpha_cem must lie in (0, 1]")
        if self.init_mean is not None:
            object.__setattr__(
                self, "init_mean", np.asarray(self.init_mean, dtype=float)
            )
        if isinstance(self.provider, str):
            object.__setattr__(self, "provider", make_provider(self.provider))

    def resolved_provider(self):
        if not isinstance(self.provider, ModelProvider):
            raise ConfigInvalid("the guided optimizer needs a model provider")
        return self.provider


@dataclass(frozen=True)
class RunRow:
    """One recorded iteration: the state x̄ after `iteration` steps."""

    iteration: int
    mean: np.ndarray
    cost: float
    ess: float
    dist_to_ref: float
    f_evals: int
    sigma_used: float
    degenerate: bool = False
    floor_infeasible: bool = False


@dataclass(frozen=True)
class RunRecord:
    """Full per-run trace plus identifying metadata."""

    problem: str
    optimizer: str
    provider: str
    num_samples: int
    seed: int
    rows: tuple
    converged: bool
    iterations: int

    def final(self):
        return self.rows[-1]


@dataclass
class GuidedIterState:
    """Mutable loop state threaded through guided_mppi_step."""

    mean: np.ndarray
    prior_cov: np.ndarray
    model_state: object = None
    guided_state: object = None


@dataclass(frozen=True)
class StepInfo:
    """Diagnostics emitted by one optimizer step."""

    ess: float
    sigma_used: float
    degenerate: bool = False
    floor_infeasible: bool = False


def _sampling_scale(cov):
    return float(np.sqrt(np.linalg.eigvalsh(cov)[-1]))


def _safe_cost(problem, x):
    """Cost of one point, with diverged dynamics scored as +inf."""
    try:
        return float(problem.cost(x))
    except NonFiniteState:
        return float("inf")


def _safe_cost_batch(problem, points):
    """Batch costs, falling back to per-point evaluation so a single
    diverged rollout poisons only its own entry (as +inf), not the batch."""
    try:
        return np.asarray(problem.cost_batch(points), dtype=float)
    except NonFiniteState:
        return np.array([_safe_cost(problem, x) for x in points])


def guided_mppi_step(state, problem, cfg, iteration, rng_model, rng_sample, mean_value=None):
    """One model-guided iteration; returns (new state, StepInfo).

    The surrogate residual f(x) - m(x) is what gets Boltzmann-weighted, so
    everything the model explains is handled in closed form and sampling
    only corrects the unexplained part.
    """
    provider = cfg.resolved_provider()
    model, model_state = provider.build(
        problem, state.mean, iteration, rng_model, state.model_state, value=mean_value
    )
    prior = GaussianParams(mean=state.mean, cov=state.prior_cov)
    ema_state = state.guided_state if cfg.formulation == "incremental" else None
    guided = build_guided_prior(prior, model, cfg.guidance, ema_state)

    points = sample_gaussian(guided.as_gaussian(), cfg.num_samples, rng_sample)
    costs = _safe_cost_batch(problem, points)
    residuals = costs - model.predict_batch(points)
    batch = SampleBatch(points=points, costs=residuals)
    if isinstance(provider, RandomizedSmoothingProvider):
        sigma_used = provider.cfg.sigma_at(iteration)
    else:
        sigma_used = _sampling_scale(guided.cov)
    try:
        weights = boltzmann_weights(residuals, cfg.guidance.temperature)
    except DegenerateBatch:
        info = StepInfo(
            ess=float("nan"),
            sigma_used=sigma_used,
            degenerate=True,
            floor_infeasible=guided.floor_infeasible,
        )
        new_state = GuidedIterState(
            mean=state.mean.copy(),
            prior_cov=state.prior_cov,
            model_state=model_state,
            guided_state=guided,
        )
        return new_state, info
    new_mean = weighted_mean(batch, weights)
    info = StepInfo(
        ess=effective_sample_size(weights),
        sigma_used=sigma_used,
        floor_infeasible=guided.floor_infeasible,
    )
    new_state = GuidedIterState(
        mean=new_mean,
        prior_cov=state.prior_cov,
        model_state=model_state,
        guided_state=guided,
    )
    return new_state, info


def vanilla_mppi_step(mean, cov, problem, temperature, num_samples, rng):
    """One fixed-prior iteration; returns (new mean, StepInfo)."""
    params = GaussianParams(mean=mean, cov=cov)
    points = sample_gaussian(params, num_samples, rng)
    costs = _safe_cost_batch(problem, points)
    batch = SampleBatch(points=points, costs=costs)
    sigma_used = _sampling_scale(cov)
    try:
        weights = boltzmann_weights(costs, temperature)
    except DegenerateBatch:
        return mean.copy(), StepInfo(
            ess=float("nan"), sigma_used=sigma_used, degenerate=True
        )
    return weighted_mean(batch, weights), StepInfo(
        ess=effective_sample_size(weights), sigma_used=sigma_used
    )


def cem_step(mean, cov, problem, num_samples, elite_frac, alpha_cem, jitter, rng):
    """One cross-entropy-method iteration; returns (mean, cov, StepInfo).

    Elites are the lowest-cost ceil(N * elite_frac) samples under a stable
    sort, so exact cost ties resolve by draw order.  The covariance update
    is smoothed: cov <- alpha * (elite covariance + jitter I) + (1-alpha) * cov.
    """
    num_elite = int(math.ceil(num_samples * elite_frac))
    if num_elite < 2:
        raise ConfigInvalid(
            "CEM needs at least 2 elites; raise num_samples or elite_frac"
        )
    params = GaussianParams(mean=mean, cov=cov)
    points = sample_gaussian(params, num_samples, rng)
    costs = _safe_cost_batch(problem, points)
    sigma_used = _sampling_scale(cov)
    if np.isinf(costs).all():
        return mean.copy(), cov, StepInfo(
            ess=float("nan"), sigma_used=sigma_used, degenerate=True
        )
    order = np.argsort(costs, kind="stable")[:num_elite]
    elites = points[order]
    new_mean = elites.mean(axis=0)
    centered = elites - new_mean
    elite_cov = centered.T @ centered / num_elite + jitter * np.eye(points.shape[1])
    new_cov = alpha_cem * elite_cov + (1.0 - alpha_cem) * cov
    new_cov = 0.5 * (new_cov + new_cov.T)
    info = StepInfo(ess=float(num_elite), sigma_used=sigma_used)
    return new_mean, new_cov, info


def newton_reference(problem, x0, tol=1e-10, max_iters=100, hess_floor=1e-6):
    """Damped Newton with convexified curvature and Armijo backtracking.

    Uses the analytic Hessian when available, central differences of the
    gradient otherwise.  Returns (best iterate, its cost, converged flag);
    a False flag means the gradient tolerance was not reached in
    ``max_iters`` — the best iterate found is still returned.
    """
    if not has_capability(problem, "grad"):
        raise CapabilityMissing(
            "%s lacks gradients needed for the Newton reference" % problem.name
        )
    x = np.asarray(x0, dtype=float).copy()
    f = problem.cost(x)
    best_x, best_f = x.copy(), f
    armijo_c = 1e-4
    for _ in range(max_iters):
        grad = np.asarray(problem.grad(x), dtype=float)
        if np.abs(grad).max() < tol:
            return x, f, True
        if has_capability(problem, "hess"):
            hess = np.asarray(problem.hess(x), dtype=float)
        else:
            hess = finite_diff_hess(problem.grad, x)
        floor = hess_floor * max(1.0, float(np.abs(hess).max()))
        hess = convexify(hess, floor)
        direction = -np.linalg.solve(hess, grad)
        slope = float(grad @ direction)
        step = 1.0
        for _ in range(60):
            candidate = x + step * direction
            f_candidate = _safe_cost(problem, candidate)
            if f_candidate <= f + armijo_c * step * slope:
                break
            step *= 0.5
        else:
            # No acceptable step: the model is untrustworthy here; stop.
            return best_x, best_f, False
        x, f = candidate, f_candidate
        if f < best_f:
            best_x, best_f = x.copy(), f
    grad = np.asarray(problem.grad(x), dtype=float)
    if np.abs(grad).max() < tol:
        return x, f, True
    return best_x, best_f, False


def _provider_name(cfg, kind):
    if kind != "guided":
        return "none"
    return cfg.resolved_provider().name


def run(problem, kind, cfg, reference=None):
    """Drive one optimizer for max_iters (or until the stop rule fires).

    ``reference`` is the point used for the dist_to_ref column; it defaults
    to the problem's known optimum when one exists.  Row k records the mean
    after k steps; the objective value at each mean costs one evaluation,
    which for guided runs doubles as the surrogate's center value (so the
    per-iteration budget stays N + provider cost).  Deterministic per
    (seed, config): identical inputs give bitwise-identical records.
    """
    if kind not in OPTIMIZER_KINDS:
        raise ConfigInvalid(
            "unknown optimizer %r (choose from %s)" % (kind, ", ".join(OPTIMIZER_KINDS))
        )
    counting = CountingProblem(problem)
    mean = (
        np.asarray(cfg.init_mean, dtype=float).copy()
        if cfg.init_mean is not None
        else np.asarray(
            getattr(problem, "default_start", np.zeros(problem.dim)), dtype=float
        ).copy()
    )
    if mean.shape != (problem.dim,):
        raise ConfigInvalid(
            "initial mean has shape %s, problem dimension is %d"
            % (mean.shape, problem.dim)
        )
    cov = cfg.init_sigma_sq * np.eye(problem.dim)
    if reference is None:
        reference = getattr(problem, "known_optimum", None)

    def distance(point):
        if reference is None:
            return float("nan")
        return float(np.abs(point - np.asarray(reference, dtype=float)).max())

    guided_state = GuidedIterState(mean=mean, prior_cov=cov)
    rows = []
    mean_value = _safe_cost(counting, mean)
    rows.append(
        RunRow(
            iteration=0,
            mean=mean.copy(),
            cost=mean_value,
            ess=float("nan"),
            dist_to_ref=distance(mean),
            f_evals=counting.cost_evals,
            sigma_used=_sampling_scale(cov),
        )
    )
    converged = cfg.stop.satisfied(mean, problem)
    iterations = 0
    if not converged:
        for k in range(1, cfg.max_iters + 1):
            # Row k records the state after step k; the step itself is the
            # (k-1)-th update, which is the index seen by schedules and RNG.
            step_index = k - 1
            rng_model = child_rng(cfg.seed, step_index, 0)
            rng_sample = child_rng(cfg.seed, step_index, 1)
            if kind == "guided":
                guided_state, info = guided_mppi_step(
                    guided_state, counting, cfg, step_index, rng_model, rng_sample,
                    mean_value,
                )
                mean = guided_state.mean
            elif kind == "vanilla":
                mean, info = vanilla_mppi_step(
                    mean, cov, counting, cfg.guidance.temperature, cfg.num_samples,
                    rng_sample,
                )
            else:
                mean, cov, info = cem_step(
                    mean, cov, counting, cfg.num_samples, cfg.elite_frac,
                    cfg.alpha_cem, cfg.cem_jitter, rng_sample,
                )
            mean_value = _safe_cost(counting, mean)
            rows.append(
                RunRow(
                    iteration=k,
                    mean=mean.copy(),
                    cost=mean_value,
                    ess=info.ess,
                    dist_to_ref=distance(mean),
                    f_evals=counting.cost_evals,
                    sigma_used=info.sigma_used,
                    degenerate=info.degenerate,
                    floor_infeasible=info.floor_infeasible,
                )
            )
            iterations = k
            if cfg.stop.satisfied(mean, problem):
                converged = True
                break

    return RunRecord(
        problem=problem.name,
        optimizer=kind,
        provider=_provider_name(cfg, kind),
        num_samples=cfg.num_samples,
        seed=cfg.seed,
        rows=tuple(rows),
        converged=converged,
        iterations=iterations,
    )
