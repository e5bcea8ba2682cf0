"""Summary statistics over run records.

Two conventions collapse a pile of :class:`~mppi_guided.optimizers.RunRecord`
objects into a table, each grouping by (problem, optimizer label, N):

* ``"mean-iterations"`` — seeds that never satisfied the stop rule count as
  failures and are excluded from the statistics; the survivors contribute
  mean and sample standard deviation (n-1 denominator) of the iteration
  count at convergence.
* ``"median-distance"`` — median and interquartile range (75th minus 25th
  percentile) of the final distance-to-reference, over all seeds.

``first_iteration_ess`` is the diagnostic used by the effective-sample-size
benchmark: the mean ESS of the very first sampling step.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigInvalid, EmptyInput

__all__ = [
    "SUMMARY_CONVENTIONS",
    "IterationSummary",
    "DistanceSummary",
    "mean_std",
    "median_iqr",
    "optimizer_label",
    "summarize",
    "first_iteration_ess",
]

SUMMARY_CONVENTIONS = ("mean-iterations", "median-distance")


def mean_std(values):
    """Mean and sample standard deviation (n-1 denominator; 0.0 when n == 1)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyInput("cannot take statistics of an empty value list")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return float(np.mean(v)), std


def median_iqr(values):
    """Median and interquartile range (75th minus 25th percentile)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyInput("cannot take statistics of an empty value list")
    q25, q50, q75 = np.percentile(v, [25.0, 50.0, 75.0])
    return float(q50), float(q75 - q25)


@dataclass(frozen=True)
class IterationSummary:
    """Convergence statistics for one (problem, optimizer, N) cell.

    ``failures`` counts seeds whose run never satisfied the stop rule; the
    mean/std cover only the remaining seeds and are NaN when every seed
    failed.
    """

    problem: str
    optimizer: str
    num_samples: int
    seeds: int
    failures: int
    mean_iterations: float
    std_iterations: float


@dataclass(frozen=True)
class DistanceSummary:
    """Final-distance statistics for one (problem, optimizer, N) cell."""

    problem: str
    optimizer: str
    num_samples: int
    seeds: int
    median_final_distance: float
    iqr_final_distance: float


def optimizer_label(record):
    """Readable optimizer identity: the kind, plus the provider for guided runs."""
    if record.provider == "none":
        return record.optimizer
    return "%s/%s" % (record.optimizer, record.provider)


def _grouped(records):
    groups = {}
    for record in records:
        key = (record.problem, optimizer_label(record), record.num_samples)
        groups.setdefault(key, []).append(record)
    return sorted(groups.items())


def summarize(records, convention):
    """Collapse run records into a list of per-cell summary rows.

    ``convention`` selects between :class:`IterationSummary` and
    :class:`DistanceSummary` rows (see the module docstring); rows come
    back sorted by (problem, optimizer, N).
    """
    records = list(records)
    if not records:
        raise EmptyInput("no run records to summarize")
    if convention not in SUMMARY_CONVENTIONS:
        raise ConfigInvalid(
            "unknown summary convention %r (choose from %s)"
            % (convention, ", ".join(SUMMARY_CONVENTIONS))
        )
    rows = []
    for (problem, label, num_samples), group in _grouped(records):
        if convention == "mean-iterations":
            iters = [r.iterations for r in group if r.converged]
            failures = sum(1 for r in group if not r.converged)
            if iters:
                mean, std = mean_std(iters)
            else:
                mean, std = float("nan"), float("nan")
            rows.append(
                IterationSummary(
                    problem=problem,
                    optimizer=label,
                    num_samples=num_samples,
                    seeds=len(group),
                    failures=failures,
                    mean_iterations=mean,
                    std_iterations=std,
                )
            )
        else:
            median, iqr = median_iqr([r.final().dist_to_ref for r in group])
            rows.append(
                DistanceSummary(
                    problem=problem,
                    optimizer=label,
                    num_samples=num_samples,
                    seeds=len(group),
                    median_final_distance=median,
                    iqr_final_distance=iqr,
                )
            )
    return rows


def first_iteration_ess(records):
    """Mean effective sample size of each optimizer's first sampling step.

    Returns rows of (problem, optimizer, N, seeds, mean_ess) dictionaries,
    sorted like :func:`summarize`.  Runs shorter than one iteration are
    rejected: there is no sampling step to diagnose.
    """
    records = list(records)
    if not records:
        raise EmptyInput("no run records to summarize")
    rows = []
    for (problem, label, num_samples), group in _grouped(records):
        values = []
        for record in group:
            if len(record.rows) < 2:
                raise EmptyInput(
                    "run (%s, %s, seed %d) recorded no sampling iteration"
                    % (problem, label, record.seed)
                )
            values.append(record.rows[1].ess)
        mean, _ = mean_std(values)
        rows.append(
            {
                "problem": problem,
                "optimizer": label,
                "num_samples": num_samples,
                "seeds": len(group),
                "mean_ess": mean,
            }
        )
    return rows
