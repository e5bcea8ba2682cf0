"""Command-line benchmark runner.

Each subcommand binds a checked-in default config (overridable with
``--config``) to a summary convention:

    bench-static       iteration counts on the analytic test functions
    bench-cartpole     sample-budget sweep on the swing-up trajectory problem
    bench-hessians     curvature-model comparison at a small sample budget
    bench-ess          effective-sample-size contrast in a curved valley
    bench-coarse-fine  coarse-to-fine smoothing schedule on the lattice objective
    profile            normalized-optimality-gap profiles over a task list

Outputs land in the resolved output directory (``MPPI_GUIDED_OUT``
environment variable > ``--out`` > config > ``results``): one row file
(``<experiment>.csv`` or ``.json`` per ``--format``) plus a
``<experiment>_summary.json`` sidecar.  Exit codes: 0 success, 2 config
error, 3 run error (with partial rows flushed).
"""

import argparse
import dataclasses
import os
import sys
from importlib import resources

from ..exceptions import ConfigInvalid, MppiGuidedError
from .configs import load_config
from .experiments import run_experiment
from .io import (
    config_hash,
    ensure_out_dir,
    resolve_out,
    rows_from_record,
    write_rows_csv,
    write_rows_json,
    write_summary_json,
)
from .profiles import performance_profile
from .stats import first_iteration_ess, summarize

__all__ = ["main", "build_parser"]

_SUBCOMMANDS = {
    "bench-static": ("static_suite.json", "mean-iterations"),
    "bench-cartpole": ("cartpole_sweep.json", "median-distance"),
    "bench-hessians": ("hessian_providers.json", "median-distance"),
    "bench-ess": ("ess_contrast.json", "ess"),
    "bench-coarse-fine": ("coarse_to_fine.json", "mean-iterations"),
    "profile": ("profile_small.json", "profile"),
}

_HELP = {
    "bench-static": "iteration-count benchmark on the analytic test functions",
    "bench-cartpole": "sample-budget sweep on the swing-up trajectory problem",
    "bench-hessians": "curvature-model comparison at a small sample budget",
    "bench-ess": "effective-sample-size contrast in a curved valley",
    "bench-coarse-fine": "coarse-to-fine smoothing schedule on the lattice objective",
    "profile": "normalized-optimality-gap profiles over a task list",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mppi-guided",
        description="Benchmark runner for guided and baseline sampling optimizers.",
        epilog="The MPPI_GUIDED_OUT environment variable overrides --out.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=_HELP[name])
        sub.add_argument("--config", help="path to a JSON experiment config")
        sub.add_argument(
            "--seeds",
            help="seed count (e.g. 100) or explicit comma list (e.g. 0,1,7)",
        )
        sub.add_argument(
            "--samples", help="comma-separated sample budgets (e.g. 2,8,64,1024)"
        )
        sub.add_argument("--max-iters", type=int, help="iteration cap override")
        sub.add_argument("--out", help="output directory")
        sub.add_argument(
            "--format", choices=("csv", "json"), default="csv", help="row file format"
        )
        sub.add_argument(
            "--jobs", type=int, default=1, help="worker processes (default 1)"
        )
    return parser


def _parse_int_spec(text, allow_count):
    try:
        if "," in text:
            return [int(part) for part in text.split(",") if part != ""]
        value = int(text)
    except ValueError:
        raise ConfigInvalid("expected an integer or comma list, got %r" % text)
    return value if allow_count else [value]


def _load_with_overrides(args):
    name, convention = _SUBCOMMANDS[args.command]
    if args.config is not None:
        config = load_config(args.config)
    else:
        ref = resources.files("mppi_guided").joinpath("configs", name)
        with resources.as_file(ref) as path:
            config = load_config(str(path))
    overrides = {}
    if args.seeds is not None:
        overrides["seeds"] = _parse_int_spec(args.seeds, allow_count=True)
    if args.samples is not None:
        overrides["samples"] = _parse_int_spec(args.samples, allow_count=False)
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config, convention


def _profile_payload(records):
    """Profile over (problem, seed) task instances, one curve per optimizer."""
    from .stats import optimizer_label  # local import to avoid cycle noise

    instances = sorted({(r.problem, r.seed) for r in records})
    methods = sorted({optimizer_label(r) for r in records})
    by_key = {}
    for record in records:
        by_key[(optimizer_label(record), record.problem, record.seed)] = record
    finals = {}
    initial = []
    for method in methods:
        values = []
        for problem, seed in instances:
            record = by_key.get((method, problem, seed))
            if record is None:
                raise ConfigInvalid(
                    "profile needs every optimizer on every task; %r missing on "
                    "(%s, seed %d)" % (method, problem, seed)
                )
            values.append(record.final().cost)
        finals[method] = values
    for problem, seed in instances:
        initial.append(by_key[(methods[0], problem, seed)].rows[0].cost)
    result = performance_profile(finals, initial)
    payload = result.as_payload()
    payload["tasks"] = ["%s/seed%d" % (p, s) for p, s in instances]
    return payload


def _summary_payload(convention, records):
    if convention == "ess":
        return {"convention": "first-iteration-ess", "rows": first_iteration_ess(records)}
    if convention == "profile":
        return {"convention": "performance-profile", "profile": _profile_payload(records)}
    rows = [dataclasses.asdict(row) for row in summarize(records, convention)]
    return {"convention": convention, "rows": rows}


def _write_rows(out_dir, experiment, fmt, rows):
    if fmt == "json":
        path = os.path.join(out_dir, "%s.json" % experiment)
        write_rows_json(path, rows)
    else:
        path = os.path.join(out_dir, "%s.csv" % experiment)
        write_rows_csv(path, rows)
    return path


def main(argv=None):
    """Entry point; returns the process exit code instead of raising."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0

    try:
        config, convention = _load_with_overrides(args)
        out_dir = ensure_out_dir(resolve_out(args.out, config.out))
    except ConfigInvalid as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2

    cfg_hash = config_hash(config.canonical())
    collected = []

    def on_record(record):
        collected.extend(rows_from_record(config.experiment, cfg_hash, record))

    try:
        result = run_experiment(config, jobs=args.jobs, on_record=on_record)
    except ConfigInvalid as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except Exception as exc:  # any run failure exits 3 with partial results
        rows_path = _write_rows(out_dir, config.experiment, args.format, collected)
        print(
            "run error: %s: %s (partial rows flushed to %s)"
            % (type(exc).__name__, exc, rows_path),
            file=sys.stderr,
        )
        return 3

    rows_path = _write_rows(out_dir, config.experiment, args.format, result.csv_rows())
    summary_path = os.path.join(out_dir, "%s_summary.json" % config.experiment)
    try:
        payload = {
            "experiment": config.experiment,
            "config_hash": result.config_hash,
        }
        payload.update(_summary_payload(convention, result.records))
        write_summary_json(summary_path, payload)
    except MppiGuidedError as exc:
        print(
            "run error: %s: %s (rows written to %s)"
            % (type(exc).__name__, exc, rows_path),
            file=sys.stderr,
        )
        return 3
    print("wrote %s and %s" % (rows_path, summary_path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
