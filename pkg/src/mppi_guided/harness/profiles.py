"""Performance profiles over a task list.

Each task supplies an initial cost and, per method, a final cost.  With
f_best the smallest final cost any method reached on that task, the
normalized optimality gap of a method is

    tau = (f_final - f_best) / (f_init - f_best),

clamped to [0, 1] (a method that ends worse than the start scores 1).  The
profile of a method is the cumulative fraction of tasks with tau below each
threshold on a grid spanning [0, 1]: 1 everywhere for a method that wins
every task, 0 below threshold 1 for a method that never improves anything.

Tasks where f_init <= f_best carry no signal (nothing improved on them, or
the start was already optimal); they are excluded and reported via
``ProfileResult.excluded``.  If every task is excluded the profile is
undefined and ``DegenerateTask`` is raised.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateTask, EmptyInput, LengthMismatch

__all__ = ["ProfileResult", "performance_profile"]


@dataclass(frozen=True)
class ProfileResult:
    """Profile curves plus the per-task gaps they were computed from.

    ``fractions[m][j]`` is the fraction of kept tasks on which method ``m``
    achieved tau <= ``thresholds[j]``; ``tau[m]`` holds the per-task gaps
    (kept tasks only, original order); ``excluded`` lists the indices of
    degenerate tasks that were dropped.
    """

    methods: tuple
    thresholds: np.ndarray
    fractions: dict
    tau: dict
    excluded: tuple

    def as_payload(self):
        """JSON-friendly dictionary mirroring all fields."""
        return {
            "methods": list(self.methods),
            "thresholds": [float(t) for t in self.thresholds],
            "fractions": {m: [float(v) for v in f] for m, f in self.fractions.items()},
            "tau": {m: [float(v) for v in t] for m, t in self.tau.items()},
            "excluded_tasks": list(self.excluded),
        }


def performance_profile(final_costs, initial_costs, thresholds=None):
    """Profile curves for ``final_costs`` (method -> per-task finals).

    ``initial_costs`` aligns with each method's task list.  ``thresholds``
    defaults to 101 evenly spaced points on [0, 1]; a custom grid must lie
    within [0, 1] and be increasing.
    """
    methods = list(final_costs)
    if not methods:
        raise EmptyInput("no methods to profile")
    finals = np.asarray([final_costs[m] for m in methods], dtype=float)
    init = np.asarray(initial_costs, dtype=float)
    if finals.ndim != 2 or finals.shape[1] != init.size:
        raise LengthMismatch(
            "final costs have shape %s but there are %d initial costs"
            % (finals.shape, init.size)
        )
    if init.size == 0:
        raise EmptyInput("no tasks to profile")
    if thresholds is None:
        thresholds = np.linspace(0.0, 1.0, 101)
    else:
        thresholds = np.asarray(thresholds, dtype=float)
        if thresholds.ndim != 1 or thresholds.size == 0:
            raise EmptyInput("threshold grid is empty")
        if np.any(np.diff(thresholds) < 0) or thresholds[0] < 0 or thresholds[-1] > 1:
            raise LengthMismatch("thresholds must increase within [0, 1]")

    f_best = finals.min(axis=0)
    keep = init > f_best
    excluded = tuple(int(i) for i in np.flatnonzero(~keep))
    if not keep.any():
        raise DegenerateTask(
            "every task has initial cost <= best final cost; nothing to profile"
        )
    tau = (finals[:, keep] - f_best[keep]) / (init[keep] - f_best[keep])
    tau = np.clip(tau, 0.0, 1.0)
    fractions = {
        m: np.mean(tau[i][:, None] <= thresholds[None, :], axis=0)
        for i, m in enumerate(methods)
    }
    return ProfileResult(
        methods=tuple(methods),
        thresholds=thresholds,
        fractions=fractions,
        tau={m: tau[i] for i, m in enumerate(methods)},
        excluded=excluded,
    )
