"""Command-line front end.

Subcommands:

* ``run`` — one experiment (task x method x iterations) to a results CSV.
* ``sweep`` — the noisy cart-pole sweep, one stats row per (kind, level).
* ``landscape`` — a single optimizer run on a function landscape, writing
  per-generation population snapshots for plotting.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .environments import load_grid_landscape, position, rastrigin
from .evolution import ConfigurationError, run_evolution
from .harness import (
    TASKS,
    ExperimentConfig,
    apply_config,
    build_environment,
    default_experiment,
    load_config_file,
    noise_sweep,
    run_experiment,
    write_results,
    write_sweep,
)
from .evolution import METHODS

_CLI_TASKS = tuple(t.replace("_", "-") for t in TASKS)
_CLI_METHODS = tuple(m.replace("_", "-") for m in METHODS)


def _canonical(name: str) -> str:
    return name.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retne",
        description="Neuroevolution benchmarks over feature-matrix genomes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write a results CSV")
    run.add_argument("--task", required=True, choices=_CLI_TASKS)
    run.add_argument("--method", required=True, choices=_CLI_METHODS)
    run.add_argument("--iterations", type=int, default=100)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--config", help="key-value config file overlaying the task defaults")
    run.add_argument("--grid-file", help="CSV height grid (grid task only)")
    run.add_argument("--out", required=True, help="results CSV path")

    sweep = sub.add_parser("sweep", help="noise sweep on the noisy cart-pole task")
    sweep.add_argument("--method", default="bi-neat", choices=_CLI_METHODS)
    sweep.add_argument("--iterations", type=int, default=50)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--config", help="key-value config file overlaying the task defaults")
    sweep.add_argument("--out", required=True, help="sweep stats CSV path")

    landscape = sub.add_parser(
        "landscape", help="single optimizer run with per-generation snapshots"
    )
    landscape.add_argument("--task", required=True, choices=("rastrigin", "grid"))
    landscape.add_argument("--method", default="gs-neat", choices=_CLI_METHODS)
    landscape.add_argument("--seed", type=int, default=0)
    landscape.add_argument("--generations", type=int, help="override the generation cap")
    landscape.add_argument("--config", help="key-value config file overlaying the task defaults")
    landscape.add_argument("--grid-file", help="CSV height grid (grid task only)")
    landscape.add_argument("--out", required=True, help="snapshot CSV path")
    return parser


def _load_experiment(args, task: str, iterations: int) -> ExperimentConfig:
    grid = None
    if task == "grid":
        if not getattr(args, "grid_file", None):
            raise ConfigurationError("the grid task needs --grid-file")
        grid = load_grid_landscape(args.grid_file)
    config = default_experiment(
        task,
        _canonical(args.method),
        iterations=iterations,
        base_seed=args.seed,
        grid=grid,
    )
    if args.config:
        config = apply_config(config, load_config_file(args.config))
    return config


def _cmd_run(args) -> int:
    config = _load_experiment(args, _canonical(args.task), args.iterations)
    stats, records = run_experiment(config)
    write_results(records, stats, args.out, task=config.task, method=config.method)
    fail_pct = 100.0 * stats.fail_rate
    avg = "NA" if stats.avg_gen is None else f"{stats.avg_gen:.2f}"
    stdev = "NA" if stats.stdev_gen is None else f"{stats.stdev_gen:.2f}"
    print(
        f"{config.task} / {config.method}: {len(records)} iterations, "
        f"fail rate {fail_pct:.1f}%, avg gen {avg}, stdev gen {stdev}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_experiment(args, "cartpole_noise", args.iterations)
    rows = noise_sweep(config)
    write_sweep(rows, config.iterations, args.out)
    for row in rows:
        fail_pct = 100.0 * row.stats.fail_rate
        print(f"{row.kind} level {row.level:g}: fail rate {fail_pct:.1f}%")
    print(f"wrote {args.out}")
    return 0


def _cmd_landscape(args) -> int:
    task = _canonical(args.task)
    config = _load_experiment(args, task, iterations=1)
    if args.generations is not None:
        from dataclasses import replace

        config = replace(
            config, evolution=replace(config.evolution, max_generations=args.generations)
        )
    env = build_environment(config)
    snapshots: list[tuple[int, int, float, float, float]] = []

    def record(generation, population):
        for index, individual in enumerate(population):
            x0, x1 = position(individual.matrix, config.genome)
            objective = (
                rastrigin((x0, x1)) if task == "rastrigin" else individual.fitness
            )
            snapshots.append((generation, index, float(x0), float(x1), float(objective)))

    result = run_evolution(
        env,
        config.evolution,
        config.mutation,
        config.genome,
        args.seed,
        on_generation=record,
    )
    out = Path(args.out)
    with out.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("generation", "index", "x", "y", "objective"))
        for row in snapshots:
            writer.writerow((row[0], row[1], repr(row[2]), repr(row[3]), repr(row[4])))
    if task == "rastrigin":
        best = min(row[4] for row in snapshots)
        target = "minimum"
    else:
        best = max(row[4] for row in snapshots)
        target = "maximum"
    status = "solved" if result.solved else "capped"
    print(
        f"{task} / {config.method}: {status} at generation {result.end_generation}, "
        f"best {target} {best:.6g}"
    )
    print(f"wrote {out}")
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "landscape":
            return _cmd_landscape(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigurationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
