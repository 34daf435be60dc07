import dataclasses
import math

import numpy as np
import pytest

from retne.environments import GridLandscape, NoiseConfig
from retne.evolution import ConfigurationError
from retne.harness import (
    ExperimentStats,
    RunRecord,
    apply_config,
    build_environment,
    compute_stats,
    default_experiment,
    default_sweep_levels,
    load_config_file,
    noise_sweep,
    population_size_for_budget,
    read_results,
    run_experiment,
    summary_path,
    write_results,
)


def tiny_experiment(task="imply", method="bi_neat", iterations=4, **evolution_overrides):
    cfg = default_experiment(task, method, iterations=iterations, base_seed=0)
    overrides = dict(max_generations=80)
    overrides.update(evolution_overrides)
    return dataclasses.replace(
        cfg, evolution=dataclasses.replace(cfg.evolution, **overrides)
    )


class TestPopulationSizeForBudget:
    def test_exact_budgets(self):
        assert population_size_for_budget(132) == 12
        assert population_size_for_budget(6) == 3
        assert population_size_for_budget(20) == 5

    def test_rounds_down_between_budgets(self):
        assert population_size_for_budget(7) == 3
        assert population_size_for_budget(11) == 3
        assert population_size_for_budget(12) == 4

    def test_rejects_tiny_budget(self):
        with pytest.raises(ValueError):
            population_size_for_budget(1)


class TestRunExperiment:
    def test_single_iteration_degenerate_stats(self, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        stats, records = run_experiment(tiny_experiment(iterations=1))
        assert len(records) == 1
        assert stats.fail_rate in (0.0, 1.0)
        if records[0].solved:
            assert stats.stdev_gen == 0.0

    def test_records_are_ordered_and_seeded(self, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        cfg = tiny_experiment(iterations=3)
        cfg = dataclasses.replace(cfg, base_seed=10)
        _, records = run_experiment(cfg)
        assert [r.iteration for r in records] == [0, 1, 2]
        assert [r.seed for r in records] == [10, 11, 12]

    def test_solved_records_respect_threshold(self, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        cfg = tiny_experiment(iterations=3)
        _, records = run_experiment(cfg)
        for r in records:
            if r.solved:
                assert r.best_fitness >= cfg.evolution.fitness_threshold
            assert r.end_generation <= cfg.evolution.max_generations

    def test_worker_counts_do_not_change_results(self, tmp_path, monkeypatch):
        cfg = tiny_experiment(iterations=4)
        outputs = []
        for workers in ("0", "2"):
            monkeypatch.setenv("RETNE_WORKERS", workers)
            stats, records = run_experiment(cfg)
            path = tmp_path / f"out_{workers}.csv"
            write_results(records, stats, path, task=cfg.task, method=cfg.method)
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]


class TestComputeStats:
    def records(self, gens_solved, gens_failed=()):
        recs = [
            RunRecord(i, i, True, g, 4.0, 3) for i, g in enumerate(gens_solved)
        ]
        recs += [
            RunRecord(len(recs) + i, 99, False, g, 1.0, 3)
            for i, g in enumerate(gens_failed)
        ]
        return recs

    def test_aggregates_over_solved_only(self):
        stats = compute_stats(self.records([10, 20, 30], [500]))
        assert stats.fail_rate == 0.25
        assert stats.avg_gen == 20.0
        assert stats.stdev_gen == pytest.approx(10.0)
        assert stats.mean_nodes == 3.0

    def test_all_failed_yields_na_markers(self):
        stats = compute_stats(self.records([], [500, 500]))
        assert stats.fail_rate == 1.0
        assert stats.avg_gen is None
        assert stats.stdev_gen is None

    def test_fail_rate_times_iterations_is_integral(self):
        recs = self.records([5] * 96, [500] * 4)
        stats = compute_stats(recs)
        product = stats.fail_rate * len(recs)
        assert abs(product - round(product)) < 1e-9


class TestResultIO:
    def test_round_trip(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        cfg = tiny_experiment(iterations=3)
        stats, records = run_experiment(cfg)
        path = tmp_path / "results.csv"
        write_results(records, stats, path, task=cfg.task, method=cfg.method)
        task, method, parsed = read_results(path)
        assert (task, method) == (cfg.task, cfg.method)
        assert parsed == records

    def test_stats_recomputed_from_csv_match(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        cfg = tiny_experiment(iterations=4)
        stats, records = run_experiment(cfg)
        path = tmp_path / "results.csv"
        write_results(records, stats, path, task=cfg.task, method=cfg.method)
        _, _, parsed = read_results(path)
        assert compute_stats(parsed) == stats

    def test_empty_records_gives_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        stats = ExperimentStats(0.0, None, None, None)
        write_results([], stats, path, task="xor", method="neat")
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("task,method,iteration")

    def test_one_record_gives_two_lines(self, tmp_path):
        path = tmp_path / "one.csv"
        record = RunRecord(0, 0, True, 7, 3.9995, 4)
        write_results([record], compute_stats([record]), path, task="xor", method="neat")
        assert len(path.read_text().strip().splitlines()) == 2

    def test_summary_sidecar_written(self, tmp_path):
        path = tmp_path / "r.csv"
        record = RunRecord(0, 0, True, 7, 3.9995, 4)
        write_results([record], compute_stats([record]), path, task="xor", method="neat")
        text = summary_path(path).read_text()
        assert "fail_rate = 0.0" in text
        assert "avg_gen = 7.0" in text

    def test_na_markers_in_summary(self, tmp_path):
        path = tmp_path / "r.csv"
        record = RunRecord(0, 0, False, 500, 1.0, 4)
        write_results([record], compute_stats([record]), path, task="xor", method="neat")
        assert "avg_gen = NA" in summary_path(path).read_text()


class TestNoiseSweep:
    def sweep_config(self, levels=(0.0, 0.1)):
        cfg = default_experiment("cartpole_noise", "bi_neat", iterations=2)
        cfg = dataclasses.replace(
            cfg,
            noise_kinds=("gaussian", "reverse"),
            noise_levels=tuple(levels),
            cartpole=dataclasses.replace(cfg.cartpole, episode_steps=60),
            evolution=dataclasses.replace(cfg.evolution, max_generations=15),
        )
        return cfg

    def test_row_per_kind_and_level(self, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        rows = noise_sweep(self.sweep_config())
        assert [(r.kind, r.level) for r in rows] == [
            ("gaussian", 0.0),
            ("gaussian", 0.1),
            ("reverse", 0.0),
            ("reverse", 0.1),
        ]

    def test_zero_level_matches_plain_run(self, monkeypatch):
        monkeypatch.setenv("RETNE_WORKERS", "0")
        cfg = self.sweep_config(levels=(0.0,))
        rows = noise_sweep(cfg)
        plain = dataclasses.replace(
            cfg, noise=dataclasses.replace(cfg.noise, kind="none", level=0.0)
        )
        stats, _ = run_experiment(plain)
        for row in rows:
            assert row.stats == stats

    def test_default_levels_cover_table_values(self):
        levels = default_sweep_levels(NoiseConfig())
        assert levels == (0.0, 0.05, 0.10, 0.20)

    def test_rejects_wrong_task(self):
        with pytest.raises(ConfigurationError):
            noise_sweep(tiny_experiment())


class TestConfigFile:
    def test_load_and_apply(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            """
            # logic gate overrides
            iteration = 7
            fitness threshold = 3.9
            evolution size = 20
            activation = relu
            dilution coefficient in Reverse = 50%
            weight range = -3, 3
            """
        )
        cfg = apply_config(tiny_experiment(), load_config_file(path))
        assert cfg.iterations == 7
        assert cfg.evolution.fitness_threshold == 3.9
        assert cfg.evolution.population_size == 5
        assert cfg.genome.activation == "relu"
        assert cfg.noise.reverse_dilution == 0.5
        assert cfg.genome.weight_range == (-3.0, 3.0)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown config key"):
            apply_config(tiny_experiment(), {"warp speed": "9"})

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigurationError, match="bad value"):
            apply_config(tiny_experiment(), {"iteration": "many"})

    def test_invalid_setting_rejected(self):
        with pytest.raises(ConfigurationError):
            apply_config(tiny_experiment(), {"connect probability": "1.5"})

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("just some words\n")
        with pytest.raises(ConfigurationError, match="expected 'key = value'"):
            load_config_file(path)


class TestBuildEnvironment:
    def test_gate_environment(self):
        env = build_environment(tiny_experiment())
        assert (env.n_inputs, env.n_outputs) == (2, 1)
        assert env.deterministic

    def test_cartpole_environment(self):
        cfg = default_experiment("cartpole", "bi_neat", iterations=1)
        env = build_environment(cfg)
        assert env.n_inputs == 4
        assert not env.deterministic

    def test_grid_requires_grid(self):
        with pytest.raises(ConfigurationError):
            default_experiment("grid", "bi_neat", iterations=1)

    def test_grid_environment(self):
        grid = GridLandscape(np.array([[0.0, 1.0], [2.0, 3.0]]))
        cfg = default_experiment("grid", "bi_neat", iterations=1, grid=grid)
        env = build_environment(cfg)
        assert env.landscape is grid

    def test_unknown_task_rejected(self):
        with pytest.raises(ConfigurationError):
            default_experiment("chess", "bi_neat")
