"""Two-input logic-gate tasks.

A network earns the full reward of 4.0 for reproducing the gate's truth
table exactly; every deviation subtracts the squared error of that case.
The alternative metric subtracts the Euclidean norm of the error vector
instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..genome import Individual, Network

MAX_REWARD = 4.0

TRUTH_TABLES: dict[str, tuple[tuple[int, int, int], ...]] = {
    "imply": ((0, 0, 1), (0, 1, 1), (1, 0, 0), (1, 1, 1)),
    "nand": ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 0)),
    "nor": ((0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 0)),
    "xor": ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)),
}


@dataclass(frozen=True)
class GateTask:
    gate: str
    euclidean_error: bool = False

    def __post_init__(self) -> None:
        if self.gate not in TRUTH_TABLES:
            raise ValueError(
                f"unknown gate {self.gate!r}, expected one of {tuple(TRUTH_TABLES)}"
            )

    @property
    def table(self) -> tuple[tuple[int, int, int], ...]:
        return TRUTH_TABLES[self.gate]


def gate_fitness(network: Network, task: GateTask) -> float:
    """Score a 2-in / 1-out network against the task's truth table."""
    if (network.n_inputs, network.n_outputs) != (2, 1):
        raise ValueError(
            f"gate tasks need a 2-input / 1-output network, got "
            f"{network.n_inputs} / {network.n_outputs}"
        )
    squared = 0.0
    for a, b, expected in task.table:
        error = expected - network.forward((float(a), float(b)))[0]
        squared += error * error
    if task.euclidean_error:
        return MAX_REWARD - math.sqrt(squared)
    return MAX_REWARD - squared


class GateEnv:
    """Deterministic environment wrapper around one gate task."""

    n_inputs = 2
    n_outputs = 1
    deterministic = True

    def __init__(self, task: GateTask):
        self.task = task

    def evaluate(self, individual: Individual, rng: np.random.Generator) -> float:
        return gate_fitness(individual.network, self.task)
