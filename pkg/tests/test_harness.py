"""Experiment harness: statistics, profiles, IO, configs, runner, and CLI."""

import json
import math

import numpy as np
import pytest

from mppi_guided.exceptions import (
    ConfigInvalid,
    DegenerateTask,
    EmptyInput,
    LengthMismatch,
)
from mppi_guided.harness import cli
from mppi_guided.harness.configs import config_from_dict, load_config
from mppi_guided.harness.experiments import (
    build_problem,
    run_experiment,
    trajectory_reference,
)
from mppi_guided.harness.io import (
    CSV_COLUMNS,
    OUT_ENV_VAR,
    canonical_json,
    config_hash,
    ensure_out_dir,
    resolve_out,
    rows_from_record,
    sorted_rows,
    write_rows_csv,
    write_rows_json,
)
from mppi_guided.harness.profiles import performance_profile
from mppi_guided.harness.stats import (
    first_iteration_ess,
    mean_std,
    median_iqr,
    optimizer_label,
    summarize,
)
from mppi_guided.optimizers import RunRecord, RunRow
from mppi_guided.problems import CartPoleSwingUp, Rosenbrock


def _row(iteration, cost=1.0, ess=float("nan"), dist=0.5, f_evals=1):
    return RunRow(
        iteration=iteration,
        mean=np.zeros(2),
        cost=cost,
        ess=ess,
        dist_to_ref=dist,
        f_evals=f_evals,
        sigma_used=0.2,
    )


def _record(
    problem="valley",
    optimizer="vanilla",
    provider="none",
    num_samples=8,
    seed=0,
    iterations=2,
    converged=True,
    final_dist=0.5,
    first_ess=4.0,
):
    rows = [_row(0)]
    for k in range(1, iterations + 1):
        rows.append(_row(k, ess=first_ess, dist=final_dist, f_evals=1 + 9 * k))
    return RunRecord(
        problem=problem,
        optimizer=optimizer,
        provider=provider,
        num_samples=num_samples,
        seed=seed,
        rows=tuple(rows),
        converged=converged,
        iterations=iterations,
    )


class TestStats:
    def test_mean_and_sample_std(self):
        mean, std = mean_std([2.0, 3.0, 4.0])
        assert mean == 3.0
        assert std == 1.0  # n-1 denominator

    def test_single_value_has_zero_std(self):
        assert mean_std([5.0]) == (5.0, 0.0)

    def test_median_and_iqr(self):
        median, iqr = median_iqr([1.0, 2.0, 3.0, 4.0])
        assert median == 2.5
        assert iqr == 1.5

    @pytest.mark.parametrize("func", [mean_std, median_iqr])
    def test_empty_input_rejected(self, func):
        with pytest.raises(EmptyInput):
            func([])

    def test_optimizer_label_includes_the_provider_only_when_present(self):
        assert optimizer_label(_record(optimizer="vanilla", provider="none")) == "vanilla"
        assert (
            optimizer_label(_record(optimizer="guided", provider="exact"))
            == "guided/exact"
        )

    def test_summarize_counts_iterations_over_converged_seeds(self):
        records = [_record(seed=s, iterations=k) for s, k in enumerate((2, 3, 4))]
        (summary,) = summarize(records, "mean-iterations")
        assert summary.mean_iterations == 3.0
        assert summary.std_iterations == 1.0
        assert summary.failures == 0
        assert summary.seeds == 3

    def test_summarize_excludes_failures_from_the_statistics(self):
        records = [_record(seed=s, iterations=3) for s in range(9)]
        records.append(_record(seed=9, iterations=100, converged=False))
        (summary,) = summarize(records, "mean-iterations")
        assert summary.failures == 1
        assert summary.seeds == 10
        assert summary.mean_iterations == 3.0
        assert summary.std_iterations == 0.0

    def test_summarize_reports_nan_when_every_seed_fails(self):
        records = [_record(seed=s, converged=False) for s in range(3)]
        (summary,) = summarize(records, "mean-iterations")
        assert summary.failures == 3
        assert math.isnan(summary.mean_iterations)
        assert math.isnan(summary.std_iterations)

    def test_summarize_distance_convention_uses_all_seeds(self):
        records = [
            _record(seed=s, final_dist=d, converged=(s % 2 == 0))
            for s, d in enumerate((1.0, 2.0, 3.0, 4.0))
        ]
        (summary,) = summarize(records, "median-distance")
        assert summary.median_final_distance == 2.5
        assert summary.iqr_final_distance == 1.5
        assert summary.seeds == 4

    def test_summarize_sorts_by_problem_then_optimizer_then_budget(self):
        records = [
            _record(problem="b", optimizer="vanilla", num_samples=8),
            _record(problem="a", optimizer="vanilla", num_samples=64),
            _record(problem="a", optimizer="guided", provider="exact", num_samples=8),
            _record(problem="a", optimizer="vanilla", num_samples=8),
        ]
        keys = [
            (s.problem, s.optimizer, s.num_samples)
            for s in summarize(records, "mean-iterations")
        ]
        assert keys == [
            ("a", "guided/exact", 8),
            ("a", "vanilla", 8),
            ("a", "vanilla", 64),
            ("b", "vanilla", 8),
        ]

    def test_summarize_validation(self):
        with pytest.raises(EmptyInput):
            summarize([], "mean-iterations")
        with pytest.raises(ConfigInvalid):
            summarize([_record()], "geometric-mean")

    def test_first_iteration_ess(self):
        records = [_record(seed=s, first_ess=e) for s, e in enumerate((2.0, 4.0))]
        (row,) = first_iteration_ess(records)
        assert row["mean_ess"] == 3.0
        assert row["seeds"] == 2

    def test_first_iteration_ess_needs_at_least_one_step(self):
        with pytest.raises(EmptyInput):
            first_iteration_ess([_record(iterations=0)])


class TestPerformanceProfile:
    def test_winning_every_task_gives_a_flat_profile_at_one(self):
        result = performance_profile(
            {"a": [0.0, 0.0, 0.0], "b": [1.0, 2.0, 3.0]}, [10.0, 10.0, 10.0]
        )
        np.testing.assert_array_equal(result.fractions["a"], np.ones(101))

    def test_never_improving_scores_zero_below_threshold_one(self):
        result = performance_profile(
            {"a": [0.0, 0.0], "b": [10.0, 10.0]}, [10.0, 10.0]
        )
        fractions = result.fractions["b"]
        assert np.all(fractions[:-1] == 0.0)
        assert fractions[-1] == 1.0
        np.testing.assert_array_equal(result.tau["b"], [1.0, 1.0])

    def test_two_method_two_task_hand_computation(self):
        # f_best = (2, 4); tau_a = (0, 1); tau_b = (0.25, 0).
        result = performance_profile(
            {"a": [2.0, 8.0], "b": [4.0, 4.0]},
            [10.0, 8.0],
            thresholds=[0.0, 0.1, 0.25, 0.5, 1.0],
        )
        np.testing.assert_array_equal(result.tau["a"], [0.0, 1.0])
        np.testing.assert_array_equal(result.tau["b"], [0.25, 0.0])
        np.testing.assert_array_equal(result.fractions["a"], [0.5, 0.5, 0.5, 0.5, 1.0])
        np.testing.assert_array_equal(result.fractions["b"], [0.5, 0.5, 1.0, 1.0, 1.0])

    def test_regressions_clamp_to_one(self):
        result = performance_profile({"a": [20.0], "b": [5.0]}, [10.0])
        assert result.tau["a"][0] == 1.0

    def test_degenerate_tasks_are_excluded_and_reported(self):
        result = performance_profile(
            {"a": [2.0, 5.0], "b": [3.0, 6.0]}, [10.0, 5.0]
        )
        assert result.excluded == (1,)
        assert result.tau["a"].shape == (1,)

    def test_all_degenerate_tasks_raise(self):
        with pytest.raises(DegenerateTask):
            performance_profile({"a": [5.0], "b": [7.0]}, [5.0])

    def test_input_validation(self):
        with pytest.raises(EmptyInput):
            performance_profile({}, [1.0])
        with pytest.raises(LengthMismatch):
            performance_profile({"a": [1.0, 2.0]}, [10.0])
        with pytest.raises(LengthMismatch):
            performance_profile({"a": [1.0]}, [10.0], thresholds=[0.5, 0.2])
        with pytest.raises(LengthMismatch):
            performance_profile({"a": [1.0]}, [10.0], thresholds=[0.5, 1.5])
        with pytest.raises(EmptyInput):
            performance_profile({"a": [1.0]}, [10.0], thresholds=[])

    def test_payload_is_json_serializable(self):
        result = performance_profile({"a": [2.0]}, [10.0])
        payload = result.as_payload()
        encoded = json.loads(json.dumps(payload))
        assert encoded["methods"] == ["a"]
        assert len(encoded["thresholds"]) == 101
        assert encoded["excluded_tasks"] == []


class TestIo:
    def test_canonical_json_is_sorted_and_compact(self):
        assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_config_hash_is_stable_and_key_order_free(self):
        first = config_hash({"b": 1, "a": 2})
        second = config_hash({"a": 2, "b": 1})
        assert first == second
        assert len(first) == 12
        assert first != config_hash({"a": 2, "b": 2})

    def test_hash_ignores_the_output_directory(self):
        base = dict(
            experiment="exp",
            seeds=2,
            samples=[4],
            tasks=[_task_dict()],
        )
        with_out = config_from_dict({**base, "out": "/tmp/somewhere"})
        without = config_from_dict(base)
        assert config_hash(with_out.canonical()) == config_hash(without.canonical())

    def test_rows_from_record_layout(self):
        record = _record(
            problem="valley", optimizer="guided", provider="exact",
            num_samples=8, seed=3, iterations=1,
        )
        rows = rows_from_record("exp", "abc123", record)
        assert len(rows) == 2
        assert rows[0][:8] == ("exp", "abc123", "guided", "exact", "valley", 8, 3, 0)
        assert rows[1][7] == 1
        assert len(rows[0]) == len(CSV_COLUMNS)

    def test_sorted_rows_orders_identifying_columns_then_iteration(self):
        def row(problem, optimizer, n, seed, iteration):
            return ("e", "h", optimizer, "none", problem, n, seed, iteration, 0.0, 0.0, 0.0, 1)

        shuffled = [
            row("b", "vanilla", 8, 0, 0),
            row("a", "vanilla", 8, 1, 1),
            row("a", "vanilla", 8, 0, 1),
            row("a", "guided", 8, 0, 0),
            row("a", "vanilla", 8, 0, 0),
            row("a", "vanilla", 2, 0, 0),
        ]
        ordered = sorted_rows(shuffled)
        assert ordered == [
            row("a", "guided", 8, 0, 0),
            row("a", "vanilla", 2, 0, 0),
            row("a", "vanilla", 8, 0, 0),
            row("a", "vanilla", 8, 0, 1),
            row("a", "vanilla", 8, 1, 1),
            row("b", "vanilla", 8, 0, 0),
        ]

    def test_csv_writing_is_deterministic_with_repr_floats(self, tmp_path):
        rows = [
            ("e", "h", "vanilla", "none", "p", 8, 0, 0, 0.1, float("nan"), 0.5, 1),
            ("e", "h", "vanilla", "none", "p", 8, 0, 1, float("inf"), 4.0, 0.25, 10),
        ]
        path = tmp_path / "rows.csv"
        write_rows_csv(path, rows)
        text = path.read_text()
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "e,h,vanilla,none,p,8,0,0,0.1,nan,0.5,1"
        assert lines[2] == "e,h,vanilla,none,p,8,0,1,inf,4.0,0.25,10"
        assert text.endswith("\n")
        write_rows_csv(tmp_path / "again.csv", list(reversed(rows)))
        assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()

    def test_json_rows_scrub_non_finite_values(self, tmp_path):
        rows = [("e", "h", "vanilla", "none", "p", 8, 0, 0, 0.1, float("nan"), 0.5, 1)]
        path = tmp_path / "rows.json"
        write_rows_json(path, rows)
        decoded = json.loads(path.read_text())
        assert decoded[0]["ess"] is None
        assert decoded[0]["cost"] == 0.1

    def test_output_directory_precedence(self, monkeypatch):
        monkeypatch.setenv(OUT_ENV_VAR, "/from/env")
        assert resolve_out("/from/cli", "/from/config") == "/from/env"
        monkeypatch.delenv(OUT_ENV_VAR)
        assert resolve_out("/from/cli", "/from/config") == "/from/cli"
        assert resolve_out(None, "/from/config") == "/from/config"
        assert resolve_out(None, None) == "results"

    def test_ensure_out_dir_creates_nested_directories(self, tmp_path):
        target = tmp_path / "a" / "b"
        assert ensure_out_dir(str(target)) == str(target)
        assert target.is_dir()

    def test_ensure_out_dir_rejects_paths_blocked_by_files(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(ConfigInvalid):
            ensure_out_dir(str(blocker / "child"))


def _optimizer_dict(label="vanilla", kind="vanilla", **extra):
    return {"label": label, "kind": kind, **extra}


def _task_dict(**overrides):
    task = {
        "problem": {"kind": "rosenbrock", "dim": 2},
        "optimizers": [
            _optimizer_dict("guided-exact", "guided", provider="exact"),
            _optimizer_dict(),
        ],
    }
    task.update(overrides)
    return task


def _config_dict(**overrides):
    data = {
        "experiment": "tiny",
        "seeds": 2,
        "samples": [4],
        "max_iters": 2,
        "tasks": [_task_dict()],
    }
    data.update(overrides)
    return data


class TestExperimentConfig:
    def test_round_trip_of_a_minimal_config(self):
        config = config_from_dict(_config_dict())
        assert config.experiment == "tiny"
        assert config.seeds == (0, 1)
        assert config.samples == (4,)
        assert config.max_iters == 2
        assert config.tasks[0].optimizers[0].provider == "exact"

    def test_explicit_seed_lists_are_preserved(self):
        config = config_from_dict(_config_dict(seeds=[3, 1, 7]))
        assert config.seeds == (3, 1, 7)

    def test_single_sample_budget_as_integer(self):
        assert config_from_dict(_config_dict(samples=100)).samples == (100,)

    @pytest.mark.parametrize(
        "mutation",
        [
            lambda d: d.update(unknown_key=1),
            lambda d: d.pop("experiment"),
            lambda d: d.pop("tasks"),
            lambda d: d.update(experiment="has spaces"),
            lambda d: d.update(tasks=[]),
            lambda d: d.update(seeds=[]),
            lambda d: d.update(seeds=0),
            lambda d: d.update(samples=[0]),
            lambda d: d.update(max_iters=-1),
        ],
    )
    def test_invalid_top_level_configs_rejected(self, mutation):
        data = _config_dict()
        mutation(data)
        with pytest.raises(ConfigInvalid):
            config_from_dict(data)

    @pytest.mark.parametrize(
        "task",
        [
            _task_dict(problem={"kind": "unknown_problem"}),
            _task_dict(problem={"kind": "rosenbrock", "extra": 1}),
            _task_dict(reference="closest"),
            _task_dict(stop={"unknown": 1}),
            _task_dict(optimizers=[]),
            _task_dict(
                optimizers=[
                    _optimizer_dict("twin", "vanilla"),
                    _optimizer_dict("twin", "cem"),
                ]
            ),
            {"problem": {"kind": "rosenbrock"}},
        ],
    )
    def test_invalid_tasks_rejected(self, task):
        with pytest.raises(ConfigInvalid):
            config_from_dict(_config_dict(tasks=[task]))

    @pytest.mark.parametrize(
        "optimizer",
        [
            _optimizer_dict(kind="annealing"),
            _optimizer_dict(kind="guided"),  # needs a provider
            _optimizer_dict(kind="guided", provider="newton"),
            _optimizer_dict(provider="exact"),  # vanilla takes no provider
            _optimizer_dict(temperature=0.0),
            _optimizer_dict(init_sigma_sq=-1.0),
            _optimizer_dict(guidance={"unknown": 1}),
            _optimizer_dict(smoothing={"unknown": 1}),
            _optimizer_dict(max_iters=-3),
            {"kind": "vanilla"},  # missing label
        ],
    )
    def test_invalid_optimizers_rejected(self, optimizer):
        with pytest.raises(ConfigInvalid):
            config_from_dict(_config_dict(tasks=[_task_dict(optimizers=[optimizer])]))

    def test_canonical_form_excludes_out_and_keeps_cem_fields(self):
        config = config_from_dict(
            _config_dict(
                out="/somewhere",
                tasks=[
                    _task_dict(
                        optimizers=[
                            _optimizer_dict("cem", "cem", elite_frac=0.2, alpha_cem=0.5)
                        ]
                    )
                ],
            )
        )
        canonical = config.canonical()
        assert "out" not in canonical
        entry = canonical["tasks"][0]["optimizers"][0]
        assert entry["elite_frac"] == 0.2
        assert entry["alpha_cem"] == 0.5

    def test_load_config_errors(self, tmp_path):
        with pytest.raises(ConfigInvalid):
            load_config(str(tmp_path / "missing.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigInvalid):
            load_config(str(bad))

    def test_packaged_default_configs_all_validate(self):
        from importlib import resources

        for name, _ in cli._SUBCOMMANDS.values():
            ref = resources.files("mppi_guided").joinpath("configs", name)
            with resources.as_file(ref) as path:
                config = load_config(str(path))
            assert config.experiment == name[: -len(".json")]


class TestExperimentRunner:
    def test_build_problem_dispatch(self):
        assert isinstance(build_problem({"kind": "rosenbrock", "dim": 2}), Rosenbrock)
        cartpole = build_problem(
            {"kind": "cartpole", "pole_length": 1.0, "state0": [0.0, 3.0, 0.0, 0.0]}
        )
        assert isinstance(cartpole, CartPoleSwingUp)
        assert cartpole.spec.pole_length == 1.0
        assert cartpole.spec.state0 == (0.0, 3.0, 0.0, 0.0)

    def test_unit_expansion_and_callback(self):
        config = config_from_dict(_config_dict())
        seen = []
        result = run_experiment(config, on_record=seen.append)
        # 1 task x 2 optimizers x 1 budget x 2 seeds
        assert len(result.records) == 4
        assert [r.seed for r in result.records] == [0, 1, 0, 1]
        assert [r.optimizer for r in result.records] == [
            "guided", "guided", "vanilla", "vanilla",
        ]
        assert seen == list(result.records)
        assert all(len(r.rows) == 3 for r in result.records)

    def test_parallel_execution_matches_serial(self):
        config = config_from_dict(_config_dict())
        serial = run_experiment(config, jobs=1)
        parallel = run_experiment(config, jobs=2)

        def stringify(rows):  # repr round-trips floats and makes NaN comparable
            return [tuple(repr(v) for v in row) for row in rows]

        assert stringify(serial.csv_rows()) == stringify(parallel.csv_rows())

    def test_jobs_must_be_positive(self):
        with pytest.raises(ConfigInvalid):
            run_experiment(config_from_dict(_config_dict()), jobs=0)

    def test_bad_start_length_fails_before_any_run(self):
        config = config_from_dict(_config_dict(tasks=[_task_dict(start=[1.0])]))
        with pytest.raises(ConfigInvalid):
            run_experiment(config)

    def test_optimum_stop_target_requires_a_known_optimum(self):
        task = {
            "problem": {"kind": "cartpole"},
            "reference": "none",
            "stop": {"target": "optimum"},
            "optimizers": [_optimizer_dict()],
        }
        config = config_from_dict(_config_dict(tasks=[task]))
        with pytest.raises(ConfigInvalid):
            run_experiment(config)

    def test_trajectory_reference_reaches_first_order_stationarity(self):
        problem = CartPoleSwingUp()
        reference = trajectory_reference(problem)
        assert np.abs(problem.grad(reference)).max() < 1e-8


@pytest.fixture()
def clean_env(monkeypatch):
    monkeypatch.delenv(OUT_ENV_VAR, raising=False)


def _write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestCli:
    def test_end_to_end_run_writes_rows_and_summary(self, tmp_path, clean_env, capsys):
        config_path = _write_config(tmp_path, _config_dict())
        out = tmp_path / "out"
        code = cli.main(
            ["bench-static", "--config", config_path, "--out", str(out)]
        )
        assert code == 0
        rows_file = out / "tiny.csv"
        summary_file = out / "tiny_summary.json"
        assert rows_file.exists() and summary_file.exists()
        lines = rows_file.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        # 4 runs x 3 rows each
        assert len(lines) == 1 + 12
        expected_hash = config_hash(config_from_dict(_config_dict()).canonical())
        assert all(line.split(",")[1] == expected_hash for line in lines[1:])
        summary = json.loads(summary_file.read_text())
        assert summary["convention"] == "mean-iterations"
        assert summary["config_hash"] == expected_hash
        assert capsys.readouterr().out.startswith("wrote ")

    def test_reruns_and_parallel_runs_are_byte_identical(self, tmp_path, clean_env):
        config_path = _write_config(tmp_path, _config_dict())
        outs = [tmp_path / name for name in ("a", "b", "c")]
        assert cli.main(["bench-static", "--config", config_path, "--out", str(outs[0])]) == 0
        assert cli.main(["bench-static", "--config", config_path, "--out", str(outs[1])]) == 0
        assert (
            cli.main(
                ["bench-static", "--config", config_path, "--out", str(outs[2]), "--jobs", "2"]
            )
            == 0
        )
        baseline = (outs[0] / "tiny.csv").read_bytes()
        assert (outs[1] / "tiny.csv").read_bytes() == baseline
        assert (outs[2] / "tiny.csv").read_bytes() == baseline

    def test_environment_variable_overrides_the_out_flag(self, tmp_path, monkeypatch):
        env_out = tmp_path / "env_out"
        monkeypatch.setenv(OUT_ENV_VAR, str(env_out))
        config_path = _write_config(tmp_path, _config_dict())
        assert cli.main(
            ["bench-static", "--config", config_path, "--out", str(tmp_path / "ignored")]
        ) == 0
        assert (env_out / "tiny.csv").exists()
        assert not (tmp_path / "ignored").exists()

    def test_json_row_format(self, tmp_path, clean_env):
        config_path = _write_config(tmp_path, _config_dict())
        out = tmp_path / "out"
        code = cli.main(
            [
                "bench-static", "--config", config_path,
                "--out", str(out), "--format", "json",
            ]
        )
        assert code == 0
        decoded = json.loads((out / "tiny.json").read_text())
        assert len(decoded) == 12
        assert set(decoded[0]) == set(CSV_COLUMNS)

    def test_seed_and_sample_overrides(self, tmp_path, clean_env):
        config_path = _write_config(tmp_path, _config_dict())
        out = tmp_path / "out"
        code = cli.main(
            [
                "bench-static", "--config", config_path, "--out", str(out),
                "--seeds", "3", "--samples", "2,8", "--max-iters", "1",
            ]
        )
        assert code == 0
        lines = (out / "tiny.csv").read_text().splitlines()[1:]
        seeds = {line.split(",")[6] for line in lines}
        budgets = {line.split(",")[5] for line in lines}
        assert seeds == {"0", "1", "2"}
        assert budgets == {"2", "8"}
        # 2 optimizers x 2 budgets x 3 seeds x 2 rows per run
        assert len(lines) == 24

    @pytest.mark.parametrize(
        "argv",
        [
            ["bench-static", "--config", "/nonexistent/config.json"],
            ["bench-static", "--seeds", "abc"],
            ["not-a-subcommand"],
            [],
        ],
    )
    def test_config_and_usage_errors_exit_2(self, argv, tmp_path, clean_env, capsys):
        if "--config" not in argv and argv and argv[0] == "bench-static":
            argv = argv + ["--config", _write_config(tmp_path, _config_dict())]
        assert cli.main(argv) == 2
        capsys.readouterr()

    def test_invalid_json_config_exits_2(self, tmp_path, clean_env, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        assert cli.main(["bench-static", "--config", str(bad)]) == 2
        assert "config error:" in capsys.readouterr().err

    def test_run_failure_exits_3_with_partial_rows(self, tmp_path, clean_env, capsys):
        # Ackley has no residual structure, so a residual-based curvature
        # provider fails at run time, after the vanilla runs have finished.
        task = {
            "problem": {"kind": "ackley"},
            "optimizers": [
                _optimizer_dict(),
                _optimizer_dict("guided-gn", "guided", provider="gauss_newton"),
            ],
        }
        config_path = _write_config(
            tmp_path, _config_dict(tasks=[task], seeds=1)
        )
        out = tmp_path / "out"
        code = cli.main(["bench-static", "--config", config_path, "--out", str(out)])
        assert code == 3
        err = capsys.readouterr().err
        assert "run error:" in err
        lines = (out / "tiny.csv").read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        # The vanilla run completed before the failure and was flushed.
        assert len(lines) == 1 + 3
        assert all(line.split(",")[2] == "vanilla" for line in lines[1:])
