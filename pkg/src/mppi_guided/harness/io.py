"""Deterministic result emission: row CSV, row JSON, and summary JSON.

Every run contributes one row per recorded iteration with the fixed column
set ``CSV_COLUMNS``; rows are sorted on their identifying columns before
writing and floats are rendered with ``repr`` (shortest round-trip form),
so identical configs and seeds produce byte-identical files regardless of
execution order or parallelism.

The config hash is the truncated SHA-256 of the experiment's canonical JSON
form; it rides along in every row so any number in any report can be traced
back to the exact configuration that produced it.  The ``MPPI_GUIDED_OUT``
environment variable overrides any requested output directory.
"""

import hashlib
import json
import math
import os

from ..exceptions import ConfigInvalid

__all__ = [
    "CSV_COLUMNS",
    "OUT_ENV_VAR",
    "canonical_json",
    "config_hash",
    "rows_from_record",
    "sorted_rows",
    "write_rows_csv",
    "write_rows_json",
    "write_summary_json",
    "resolve_out",
    "ensure_out_dir",
]

CSV_COLUMNS = (
    "experiment",
    "config_hash",
    "optimizer",
    "provider",
    "problem",
    "N",
    "seed",
    "iter",
    "cost",
    "ess",
    "dist_to_ref",
    "f_evals",
)

OUT_ENV_VAR = "MPPI_GUIDED_OUT"


def canonical_json(data):
    """Key-sorted, whitespace-free JSON; the hashing form of a config."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(data):
    """First 12 hex digits of the SHA-256 of the canonical JSON form."""
    digest = hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
    return digest[:12]


def rows_from_record(experiment, cfg_hash, record):
    """One CSV row tuple per recorded iteration of one run."""
    return [
        (
            experiment,
            cfg_hash,
            record.optimizer,
            record.provider,
            record.problem,
            record.num_samples,
            record.seed,
            row.iteration,
            row.cost,
            row.ess,
            row.dist_to_ref,
            row.f_evals,
        )
        for row in record.rows
    ]


def sorted_rows(rows):
    """Rows in canonical order: all identifying columns, then iteration."""
    return sorted(rows, key=lambda r: (r[0], r[4], r[2], r[3], r[5], r[6], r[7]))


def _format_field(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(path, rows):
    """Write rows (sorted, repr-formatted floats) under the fixed header."""
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(_format_field(v) for v in row) for row in sorted_rows(rows))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_rows_json(path, rows):
    """Same content as the CSV, as a list of column-keyed objects.

    Non-finite floats become nulls: strict JSON has no NaN/Infinity.
    """
    records = [
        {col: _jsonable(v) for col, v in zip(CSV_COLUMNS, row)}
        for row in sorted_rows(rows)
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(records, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")


def _scrub(payload):
    if isinstance(payload, dict):
        return {k: _scrub(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_scrub(v) for v in payload]
    return _jsonable(payload)


def write_summary_json(path, payload):
    """Write the JSON summary sidecar (key-sorted, NaN scrubbed to null)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(_scrub(payload), handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")


def resolve_out(cli_out=None, config_out=None, default="results"):
    """Output directory precedence: environment > flag > config > default."""
    env = os.environ.get(OUT_ENV_VAR)
    if env:
        return env
    if cli_out:
        return cli_out
    if config_out:
        return config_out
    return default


def ensure_out_dir(path):
    """Create the output directory if needed and confirm it is writable."""
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigInvalid("cannot create output directory %r: %s" % (path, exc))
    if not os.access(path, os.W_OK):
        raise ConfigInvalid("output directory %r is not writable" % path)
    return path
