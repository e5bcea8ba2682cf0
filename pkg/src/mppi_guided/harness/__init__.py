"""Benchmark harness: experiment configs, seeded sweeps, statistics, output.

The pieces compose left to right: a JSON file becomes an
:class:`~mppi_guided.harness.configs.ExperimentConfig`, the experiment
runner expands it into (task, optimizer, sample budget, seed) runs and
executes them deterministically, statistics collapse the run records into
summary tables, and the io module emits byte-stable CSV plus a JSON
summary sidecar.  The command-line interface in ``cli`` wires a
subcommand to each checked-in config.
"""

from .configs import ExperimentConfig, OptimizerSetting, TaskSetting, load_config
from .experiments import run_experiment, trajectory_reference
from .io import CSV_COLUMNS, config_hash, resolve_out, rows_from_record, write_rows_csv
from .profiles import ProfileResult, performance_profile
from .stats import (
    DistanceSummary,
    IterationSummary,
    first_iteration_ess,
    mean_std,
    median_iqr,
    summarize,
)

__all__ = [
    "ExperimentConfig",
    "OptimizerSetting",
    "TaskSetting",
    "load_config",
    "run_experiment",
    "trajectory_reference",
    "CSV_COLUMNS",
    "config_hash",
    "resolve_out",
    "rows_from_record",
    "write_rows_csv",
    "ProfileResult",
    "performance_profile",
    "DistanceSummary",
    "IterationSummary",
    "first_iteration_ess",
    "mean_std",
    "median_iqr",
    "summarize",
]
