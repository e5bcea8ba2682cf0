"""Experiment configuration: JSON schema, validation, canonical form.

An experiment file is a JSON object:

    {
      "experiment": "static_suite",          # identifier (CSV-safe slug)
      "seeds": 100,                          # int n -> [0..n-1], or a list
      "samples": [100],                      # sample budgets N to sweep
      "max_iters": 50,                       # default iteration cap
      "out": "results",                      # optional output directory
      "tasks": [ { ... task ... }, ... ]
    }

Each task binds one problem to the optimizers run on it:

    {
      "problem": {"kind": "rosenbrock", "dim": 2},   # or {"kind": "cartpole", ...}
      "start": [x, y],                     # optional; problem default otherwise
      "reference": "optimum",              # "optimum" | "newton" | "none"
      "stop": {"target": "optimum", "target_tol": 0.05},   # optional
      "optimizers": [ { ... optimizer ... }, ... ]
    }

and each optimizer entry selects a loop plus its hyperparameters:

    {
      "label": "guided-exact",             # unique within the task
      "kind": "guided",                    # "guided" | "vanilla" | "cem"
      "provider": "exact",                 # guided only
      "temperature": 0.03,
      "init_sigma_sq": 0.25,
      "smoothing": {"sigma": 1.5, "num_samples": 2048, "schedule": [[3, 0.1]]},
      "guidance": {"hess_floor": 1e-6},    # extra GuidanceConfig fields
      "samples": [8],                      # optional per-optimizer N override
      "max_iters": 450                     # optional per-optimizer cap
    }

Unknown keys anywhere are rejected.  ``canonical()`` returns the plain-dict
form used for hashing; it excludes the output directory, so moving results
around never changes a config hash.
"""

import json
import re
from dataclasses import dataclass, field

from ..exceptions import ConfigInvalid
from ..optimizers import OPTIMIZER_KINDS

__all__ = [
    "OptimizerSetting",
    "TaskSetting",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
]

_SLUG = re.compile(r"^[A-Za-z0-9._/-]+$")

_STATIC_KINDS = (
    "ackley",
    "narrow_valley_2d",
    "rastrigin",
    "rosenbrock",
    "sinusoid_convex_1d",
    "styblinski_tang",
)
_PROVIDER_NAMES = ("exact", "finite_diff", "gauss_newton", "bfgs", "adam_diag", "rs")
_REFERENCE_MODES = ("optimum", "newton", "none")
_GUIDANCE_KEYS = (
    "alpha_delta",
    "alpha_sigma",
    "sigma_target_sq",
    "hess_floor",
    "sigma0_sq_ceiling",
)


def _check_keys(data, allowed, context):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigInvalid(
            "unknown key(s) %s in %s (allowed: %s)"
            % (", ".join(unknown), context, ", ".join(sorted(allowed)))
        )


def _slug(value, context):
    if not isinstance(value, str) or not _SLUG.match(value):
        raise ConfigInvalid(
            "%s must be a non-empty string of [A-Za-z0-9._/-], got %r"
            % (context, value)
        )
    return value


def _positive(value, context):
    value = float(value)
    if value <= 0.0:
        raise ConfigInvalid("%s must be positive, got %g" % (context, value))
    return value


def _int_list(value, context, allow_count=False):
    """Normalize an int count or explicit list into a tuple of ints."""
    if isinstance(value, bool):
        raise ConfigInvalid("%s must be an integer or list, got a bool" % context)
    if isinstance(value, int):
        if allow_count:
            if value < 1:
                raise ConfigInvalid("%s count must be >= 1, got %d" % (context, value))
            return tuple(range(value))
        value = [value]
    try:
        items = tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigInvalid("%s must be a list of integers, got %r" % (context, value))
    if not items:
        raise ConfigInvalid("%s must not be empty" % context)
    return items


@dataclass(frozen=True)
class OptimizerSetting:
    """One optimizer column of an experiment (see the module docstring)."""

    label: str
    kind: str
    provider: str = None
    provider_opts: dict = field(default_factory=dict)
    temperature: float = 0.1
    init_sigma_sq: float = 1.0
    smoothing: dict = None
    guidance: dict = field(default_factory=dict)
    samples: tuple = None
    max_iters: int = None
    elite_frac: float = 0.1
    alpha_cem: float = 0.9

    def __post_init__(self):
        _slug(self.label, "optimizer label")
        if self.kind not in OPTIMIZER_KINDS:
            raise ConfigInvalid(
                "optimizer %r has unknown kind %r (choose from %s)"
                % (self.label, self.kind, ", ".join(OPTIMIZER_KINDS))
            )
        if self.kind == "guided":
            if self.provider not in _PROVIDER_NAMES:
                raise ConfigInvalid(
                    "guided optimizer %r needs a provider from %s, got %r"
                    % (self.label, ", ".join(_PROVIDER_NAMES), self.provider)
                )
        elif self.provider is not None:
            raise ConfigInvalid(
                "optimizer %r of kind %r does not take a provider"
                % (self.label, self.kind)
            )
        _positive(self.temperature, "optimizer %r temperature" % self.label)
        _positive(self.init_sigma_sq, "optimizer %r init_sigma_sq" % self.label)
        _check_keys(
            self.guidance, _GUIDANCE_KEYS, "optimizer %r guidance" % self.label
        )
        if self.smoothing is not None:
            _check_keys(
                self.smoothing,
                ("sigma", "num_samples", "schedule"),
                "optimizer %r smoothing" % self.label,
            )
        if self.samples is not None:
            object.__setattr__(
                self, "samples", _int_list(self.samples, "optimizer samples")
            )
        if self.max_iters is not None and int(self.max_iters) < 0:
            raise ConfigInvalid("optimizer %r max_iters must be >= 0" % self.label)

    def canonical(self):
        data = {
            "label": self.label,
            "kind": self.kind,
            "temperature": self.temperature,
            "init_sigma_sq": self.init_sigma_sq,
        }
        if self.provider is not None:
            data["provider"] = self.provider
        if self.provider_opts:
            data["provider_opts"] = dict(self.provider_opts)
        if self.smoothing is not None:
            data["smoothing"] = dict(self.smoothing)
        if self.guidance:
            data["guidance"] = dict(self.guidance)
        if self.samples is not None:
            data["samples"] = list(self.samples)
        if self.max_iters is not None:
            data["max_iters"] = int(self.max_iters)
        if self.kind == "cem":
            data["elite_frac"] = self.elite_frac
            data["alpha_cem"] = self.alpha_cem
        return data

    @classmethod
    def from_dict(cls, data):
        _check_keys(
            data,
            (
                "label",
                "kind",
                "provider",
                "provider_opts",
                "temperature",
                "init_sigma_sq",
                "smoothing",
                "guidance",
                "samples",
                "max_iters",
                "elite_frac",
                "alpha_cem",
            ),
            "optimizer entry %r" % data.get("label", "<unlabeled>"),
        )
        if "label" not in data or "kind" not in data:
            raise ConfigInvalid("every optimizer entry needs 'label' and 'kind'")
        return cls(**data)


@dataclass(frozen=True)
class TaskSetting:
    """One problem plus the optimizers compared on it."""

    problem: dict
    optimizers: tuple
    start: tuple = None
    reference: str = "optimum"
    stop: dict = None

    def __post_init__(self):
        if not isinstance(self.problem, dict) or "kind" not in self.problem:
            raise ConfigInvalid("task problem must be an object with a 'kind'")
        kind = self.problem["kind"]
        if kind == "cartpole":
            pass  # remaining keys are validated by CartPoleSpec at build time
        elif kind in _STATIC_KINDS:
            _check_keys(self.problem, ("kind", "dim"), "problem %r" % kind)
        else:
            raise ConfigInvalid(
                "unknown problem kind %r (choose from %s, cartpole)"
                % (kind, ", ".join(_STATIC_KINDS))
            )
        if not self.optimizers:
            raise ConfigInvalid("task %r has no optimizers" % kind)
        optimizers = tuple(
            o if isinstance(o, OptimizerSetting) else OptimizerSetting.from_dict(o)
            for o in self.optimizers
        )
        labels = [o.label for o in optimizers]
        if len(set(labels)) != len(labels):
            raise ConfigInvalid("duplicate optimizer labels in task %r" % kind)
        object.__setattr__(self, "optimizers", optimizers)
        if self.start is not None:
            object.__setattr__(
                self, "start", tuple(float(v) for v in self.start)
            )
        if self.reference not in _REFERENCE_MODES:
            raise ConfigInvalid(
                "task reference must be one of %s, got %r"
                % (", ".join(_REFERENCE_MODES), self.reference)
            )
        if self.stop is not None:
            _check_keys(
                self.stop, ("target", "target_tol", "grad_tol"), "task stop rule"
            )

    def canonical(self):
        data = {
            "problem": dict(self.problem),
            "reference": self.reference,
            "optimizers": [o.canonical() for o in self.optimizers],
        }
        if self.start is not None:
            data["start"] = list(self.start)
        if self.stop is not None:
            data["stop"] = dict(self.stop)
        return data

    @classmethod
    def from_dict(cls, data):
        _check_keys(
            data,
            ("problem", "optimizers", "start", "reference", "stop"),
            "task entry",
        )
        if "problem" not in data or "optimizers" not in data:
            raise ConfigInvalid("every task needs 'problem' and 'optimizers'")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    """A full experiment: tasks x optimizers x sample budgets x seeds."""

    experiment: str
    tasks: tuple
    seeds: tuple
    samples: tuple
    max_iters: int = 1000
    out: str = None

    def __post_init__(self):
        _slug(self.experiment, "experiment name")
        tasks = tuple(
            t if isinstance(t, TaskSetting) else TaskSetting.from_dict(t)
            for t in self.tasks
        )
        if not tasks:
            raise ConfigInvalid("experiment %r has no tasks" % self.experiment)
        object.__setattr__(self, "tasks", tasks)
        object.__setattr__(self, "seeds", _int_list(self.seeds, "seeds", allow_count=True))
        object.__setattr__(self, "samples", _int_list(self.samples, "samples"))
        if any(n < 1 for n in self.samples):
            raise ConfigInvalid("sample budgets must be >= 1")
        if int(self.max_iters) < 0:
            raise ConfigInvalid("max_iters must be >= 0")
        object.__setattr__(self, "max_iters", int(self.max_iters))

    def canonical(self):
        """Plain-dict form used for hashing; excludes the output directory."""
        return {
            "experiment": self.experiment,
            "seeds": list(self.seeds),
            "samples": list(self.samples),
            "max_iters": self.max_iters,
            "tasks": [t.canonical() for t in self.tasks],
        }

    @classmethod
    def from_dict(cls, data):
        _check_keys(
            data,
            ("experiment", "tasks", "seeds", "samples", "max_iters", "out"),
            "experiment config",
        )
        for key in ("experiment", "tasks", "seeds", "samples"):
            if key not in data:
                raise ConfigInvalid("experiment config is missing %r" % key)
        return cls(**data)


def config_from_dict(data):
    """Validate a decoded JSON object into an ExperimentConfig."""
    if not isinstance(data, dict):
        raise ConfigInvalid("experiment config must be a JSON object")
    return ExperimentConfig.from_dict(data)


def load_config(path):
    """Read and validate an experiment config from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigInvalid("cannot read config %r: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("config %r is not valid JSON: %s" % (path, exc))
    return config_from_dict(data)
