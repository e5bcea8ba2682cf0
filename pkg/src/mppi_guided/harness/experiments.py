"""Expand an experiment config into runs and execute them deterministically.

A config yields one run per (task, optimizer, sample budget, seed); each run
owns its problem instance and RNG streams, so runs can execute in any order
or in parallel worker processes with identical results.  References are
resolved once per task before dispatch: the problem's known optimum, a
Newton-solved trajectory (``trajectory_reference``), or nothing.

The trajectory reference is solved in two phases: a damped-Newton flow
x <- x - (H_pd + damping I)^-1 g from the start point, which follows the
same fixed-point path the guided optimizer contracts along and is stable
where the undamped method is not, then an undamped Newton polish with line
search down to gradient tolerance.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigInvalid, MppiGuidedError
from ..guidance import GuidanceConfig, convexify
from ..models import SmoothingConfig, make_provider
from ..optimizers import OptimizerConfig, StopRule, newton_reference, run
from ..problems import CartPoleSpec, CartPoleSwingUp, make_static
from .io import config_hash, rows_from_record

__all__ = [
    "ExperimentResult",
    "build_problem",
    "trajectory_reference",
    "run_experiment",
]


@dataclass(frozen=True)
class ExperimentResult:
    """Everything one experiment produced, in canonical run order."""

    config: object
    config_hash: str
    records: tuple

    def csv_rows(self):
        rows = []
        for record in self.records:
            rows.extend(
                rows_from_record(self.config.experiment, self.config_hash, record)
            )
        return rows


def build_problem(problem_spec):
    """Instantiate the problem named by a task's ``problem`` object."""
    params = dict(problem_spec)
    kind = params.pop("kind")
    if kind == "cartpole":
        for key in ("state0", "goal", "q_weights"):
            if key in params:
                params[key] = tuple(params[key])
        return CartPoleSwingUp(CartPoleSpec(**params))
    return make_static(kind, dim=params.pop("dim", None))


def trajectory_reference(
    problem,
    start=None,
    damping=1.0,
    flow_iters=250,
    hess_floor=1e-6,
    tol=1e-10,
    polish_iters=200,
):
    """Solve a trajectory problem to a Newton-converged reference point.

    Runs ``flow_iters`` damped-Newton steps from ``start`` (the problem's
    default start when None), then polishes with the undamped line-search
    Newton method until the infinity-norm gradient drops below ``tol``.
    """
    x = np.asarray(
        problem.default_start if start is None else start, dtype=float
    ).copy()
    eye = np.eye(problem.dim)
    for _ in range(flow_iters):
        grad = np.asarray(problem.grad(x), dtype=float)
        hess = np.asarray(problem.hess(x), dtype=float)
        floor = hess_floor * max(1.0, float(np.abs(hess).max()))
        hess = convexify(hess, floor)
        x = x - np.linalg.solve(hess + damping * eye, grad)
    x, _, converged = newton_reference(
        problem, x, tol=tol, max_iters=polish_iters, hess_floor=hess_floor
    )
    if not converged:
        raise MppiGuidedError(
            "reference solve stalled above gradient tolerance %g" % tol
        )
    return x


def _task_reference(problem, task):
    if task.reference == "none":
        return None
    if task.reference == "newton":
        return trajectory_reference(problem, start=task.start)
    return getattr(problem, "known_optimum", None)


def _build_provider(setting):
    if setting.provider is None:
        return None
    opts = {
        k: tuple(v) if isinstance(v, list) else v
        for k, v in setting.provider_opts.items()
    }
    if setting.provider == "rs":
        smoothing = setting.smoothing or {}
        cfg = SmoothingConfig(
            sigma=smoothing.get("sigma", 1.0),
            num_samples=int(smoothing.get("num_samples", 16)),
            schedule=tuple(
                (int(k), float(s)) for k, s in smoothing.get("schedule", ())
            ),
        )
        return make_provider("rs", cfg=cfg, **opts)
    return make_provider(setting.provider, **opts)


def _stop_rule(task, problem):
    if task.stop is None:
        return StopRule()
    target = task.stop.get("target")
    if target == "optimum":
        target = getattr(problem, "known_optimum", None)
        if target is None:
            raise ConfigInvalid(
                "problem %s has no known optimum to use as a stop target"
                % problem.name
            )
    elif target is not None:
        target = np.asarray(target, dtype=float)
    grad_tol = task.stop.get("grad_tol")
    return StopRule(
        target=target,
        target_tol=float(task.stop.get("target_tol", 0.05)),
        grad_tol=None if grad_tol is None else float(grad_tol),
    )


def _optimizer_config(config, task, setting, num_samples, seed):
    guidance = GuidanceConfig(temperature=setting.temperature, **setting.guidance)
    cap = setting.max_iters if setting.max_iters is not None else config.max_iters
    return dict(
        num_samples=num_samples,
        max_iters=cap,
        seed=seed,
        init_mean=None if task.start is None else np.asarray(task.start, dtype=float),
        init_sigma_sq=setting.init_sigma_sq,
        guidance=guidance,
        provider=_build_provider(setting),
        elite_frac=setting.elite_frac,
        alpha_cem=setting.alpha_cem,
    )


def _expand_units(config):
    units = []
    for task_index, task in enumerate(config.tasks):
        for optimizer_index, setting in enumerate(task.optimizers):
            budgets = setting.samples if setting.samples is not None else config.samples
            for num_samples in budgets:
                for seed in config.seeds:
                    units.append((task_index, optimizer_index, num_samples, seed))
    return units


def _execute_unit(args):
    config, task_index, optimizer_index, num_samples, seed, reference = args
    task = config.tasks[task_index]
    setting = task.optimizers[optimizer_index]
    problem = build_problem(task.problem)
    pieces = _optimizer_config(config, task, setting, num_samples, seed)
    stop = _stop_rule(task, problem)
    opt_config = OptimizerConfig(stop=stop, **pieces)
    return run(problem, setting.kind, opt_config, reference=reference)


def run_experiment(config, jobs=1, on_record=None):
    """Execute every run of ``config`` and return an ExperimentResult.

    ``jobs`` > 1 fans runs out over that many worker processes; results
    are aggregated by run key, so any job count produces identical output.
    ``on_record`` (if given) is called with each RunRecord as it completes,
    which lets a caller flush partial results when a later run fails.
    """
    if jobs < 1:
        raise ConfigInvalid("jobs must be >= 1, got %d" % jobs)
    cfg_hash = config_hash(config.canonical())

    references = {}
    for task_index, task in enumerate(config.tasks):
        problem = build_problem(task.problem)
        if task.start is not None and len(task.start) != problem.dim:
            raise ConfigInvalid(
                "task start has %d entries, problem %s has dimension %d"
                % (len(task.start), problem.name, problem.dim)
            )
        _stop_rule(task, problem)  # fail on bad stop targets before running
        references[task_index] = _task_reference(problem, task)

    units = _expand_units(config)
    payloads = [
        (config, ti, oi, n, seed, references[ti]) for ti, oi, n, seed in units
    ]
    records = []
    if jobs == 1:
        for payload in payloads:
            record = _execute_unit(payload)
            records.append(record)
            if on_record is not None:
                on_record(record)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for record in pool.map(_execute_unit, payloads):
                records.append(record)
                if on_record is not None:
                    on_record(record)
    return ExperimentResult(
        config=config, config_hash=cfg_hash, records=tuple(records)
    )
