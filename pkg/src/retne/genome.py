"""Fixed-size feature-matrix genomes and their decoded feedforward networks.

A genome is an ``m x (m + 1)`` real matrix for a network capped at ``m``
nodes: column 0 holds one bias per node, and column ``j + 1`` holds the
connection weights into node ``j``.  Weight cells may be nonzero only above
the diagonal (source index < target index), so every genome decodes to an
acyclic network that is evaluated in a single pass over ascending node
indices.  Nodes are laid out as inputs, then hidden nodes, then outputs;
a weight of exactly zero means "no connection".

Matrices are plain float ndarrays.  Once wrapped in an :class:`Individual`
they are frozen (read-only) and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

ACTIVATIONS = ("sigmoid", "relu")


class InvalidGenomeError(ValueError):
    """A matrix that cannot be decoded into a network."""


@dataclass(frozen=True)
class GenomeConfig:
    """Shape and value bounds shared by every genome in a population.

    ``max_nodes`` is the hard cap on network size (inputs + outputs +
    hidden budget); it fixes the matrix dimensions and therefore the
    search space.  ``connect_prob`` is the chance that a random genome
    wires any given admissible connection.
    """

    n_inputs: int
    n_outputs: int
    max_nodes: int
    activation: str = "sigmoid"
    weight_range: tuple[float, float] = (-5.0, 5.0)
    bias_range: tuple[float, float] = (-5.0, 5.0)
    connect_prob: float = 0.75

    def __post_init__(self) -> None:
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("need at least one input and one output node")
        if self.max_nodes < self.n_inputs + self.n_outputs:
            raise ValueError(
                f"max_nodes={self.max_nodes} cannot hold "
                f"{self.n_inputs} inputs + {self.n_outputs} outputs"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}, expected one of {ACTIVATIONS}")
        for name in ("weight_range", "bias_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{name} must be a finite (lo, hi) pair with lo < hi")
        if not 0.0 <= self.connect_prob <= 1.0:
            raise ValueError("connect_prob must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.max_nodes, self.max_nodes + 1)


@lru_cache(maxsize=None)
def _mutable_cells(n_inputs: int, n_outputs: int, max_nodes: int):
    rows, cols, is_weight = [], [], []
    for i in range(n_inputs, max_nodes):
        rows.append(i)
        cols.append(0)
        is_weight.append(False)
    for i in range(max_nodes):
        for j in range(max(i + 1, n_inputs), max_nodes):
            rows.append(i)
            cols.append(j + 1)
            is_weight.append(True)
    out = (
        np.array(rows, dtype=np.intp),
        np.array(cols, dtype=np.intp),
        np.array(is_weight, dtype=bool),
    )
    for arr in out:
        arr.setflags(write=False)
    return out


def mutable_cells(config: GenomeConfig):
    """Index arrays ``(rows, cols, is_weight)`` of the cells a genome may vary.

    Biases of non-input nodes come first, then admissible weight cells
    (source < target, target not an input) in row-major order.  All other
    cells are semantically dead and stay at zero: input biases and
    connections into inputs are ignored by decoding, and at-or-below
    diagonal weights would break the acyclic ordering.
    """
    return _mutable_cells(config.n_inputs, config.n_outputs, config.max_nodes)


@lru_cache(maxsize=None)
def _lower_cells(max_nodes: int):
    rows, cols = np.tril_indices(max_nodes)
    return rows, cols + 1  # weight block starts at column 1


def validate_matrix(matrix: np.ndarray, config: GenomeConfig) -> None:
    """Raise :class:`InvalidGenomeError` unless ``matrix`` is decodable."""
    if matrix.shape != config.shape:
        raise InvalidGenomeError(
            f"matrix shape {matrix.shape} does not match required {config.shape}"
        )
    rows, cols = _lower_cells(config.max_nodes)
    lower = matrix[rows, cols]  # at-or-below-diagonal weights, incl. self-loops
    if np.any(lower != 0.0):
        bad = int(np.flatnonzero(lower != 0.0)[0])
        i, j = int(rows[bad]), int(cols[bad]) - 1
        raise InvalidGenomeError(
            f"weight cell ({i} -> {j}) is at or below the diagonal and must be zero"
        )


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _relu(x: float) -> float:
    return x if x > 0.0 else 0.0


def _sigmoid_batch(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _relu_batch(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


_SCALAR_ACT = {"sigmoid": _sigmoid, "relu": _relu}
_BATCH_ACT = {"sigmoid": _sigmoid_batch, "relu": _relu_batch}


class Network:
    """Executable feedforward network decoded from a feature matrix.

    The forward pass is pure: it holds no state between calls, so the same
    inputs always reproduce the same outputs bit for bit.  Construction is
    the only place the matrix is read.
    """

    __slots__ = ("n_inputs", "n_outputs", "size", "activation", "_nodes", "_batch_nodes")

    def __init__(self, matrix: np.ndarray, config: GenomeConfig):
        self.n_inputs = config.n_inputs
        self.n_outputs = config.n_outputs
        self.size = config.max_nodes
        self.activation = config.activation
        # Per non-input node: (index, bias, incoming (source, weight) pairs).
        grid = matrix.tolist()
        nodes = []
        for j in range(self.n_inputs, self.size):
            col = j + 1
            pairs = tuple(
                (i, grid[i][col]) for i in range(j) if grid[i][col] != 0.0
            )
            nodes.append((j, grid[j][0], pairs))
        self._nodes = nodes
        self._batch_nodes = None

    def forward(self, inputs: Sequence[float]) -> list[float]:
        """Evaluate one input vector, returning output-node values in order."""
        if len(inputs) != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {len(inputs)}")
        values = [0.0] * self.size
        for k, raw in enumerate(inputs):
            x = float(raw)
            if not math.isfinite(x):
                raise ValueError(f"input {k} is not finite: {raw!r}")
            values[k] = x
        act = _SCALAR_ACT[self.activation]
        for j, bias, pairs in self._nodes:
            total = bias
            for i, w in pairs:
                total += w * values[i]
            values[j] = act(total)
        return values[self.size - self.n_outputs :]

    def forward_batch(self, inputs: np.ndarray) -> np.ndarray:
        """Evaluate a ``(k, n_inputs)`` batch, returning ``(k, n_outputs)``."""
        batch = np.asarray(inputs, dtype=float)
        if batch.ndim != 2 or batch.shape[1] != self.n_inputs:
            raise ValueError(f"expected shape (k, {self.n_inputs}), got {batch.shape}")
        if not np.isfinite(batch).all():
            raise ValueError("batch contains non-finite inputs")
        if self._batch_nodes is None:
            self._batch_nodes = [
                (
                    j,
                    bias,
                    np.array([i for i, _ in pairs], dtype=np.intp),
                    np.array([w for _, w in pairs]),
                )
                for j, bias, pairs in self._nodes
            ]
        k = batch.shape[0]
        act = _BATCH_ACT[self.activation]
        values = np.zeros((self.size, k))
        values[: self.n_inputs] = batch.T
        for j, bias, src, weights in self._batch_nodes:
            total = np.full(k, bias)
            if src.size:
                total += weights @ values[src]
            values[j] = act(total)
        return values[self.size - self.n_outputs :].T


@dataclass(frozen=True, eq=False)
class Individual:
    """One genome: its matrix, decoded network, and cached fitness.

    Fitness is NaN until an environment evaluates the individual; use
    :meth:`with_fitness` to attach a score without mutating shared state.
    """

    matrix: np.ndarray
    network: Network
    fitness: float = math.nan

    @property
    def evaluated(self) -> bool:
        return math.isfinite(self.fitness)

    def with_fitness(self, value: float) -> "Individual":
        return replace(self, fitness=float(value))


def create(matrix: np.ndarray, config: GenomeConfig) -> Individual:
    """Decode a feature matrix into an unevaluated individual.

    The matrix is copied and frozen, so the individual is immutable and
    re-decoding its matrix reproduces identical network outputs.
    """
    frozen = np.array(matrix, dtype=float)
    validate_matrix(frozen, config)
    frozen.setflags(write=False)
    return Individual(matrix=frozen, network=Network(frozen, config))


def distance(f_i: np.ndarray, f_j: np.ndarray) -> float:
    """Euclidean (Frobenius) distance between two feature matrices."""
    a = np.asarray(f_i, dtype=float)
    b = np.asarray(f_j, dtype=float)
    if a.shape != b.shape:
        raise InvalidGenomeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sqrt(np.sum(diff * diff)))


def check_distance(min_d: float, individual: Individual, others: Iterable[Individual]) -> bool:
    """True when ``individual`` keeps at least ``min_d`` from every member.

    Vacuously true for an empty collection; the boundary (distance exactly
    ``min_d``) is accepted.
    """
    for other in others:
        if distance(individual.matrix, other.matrix) < min_d:
            return False
    return True


def random_matrix(config: GenomeConfig, rng: np.random.Generator) -> np.ndarray:
    """Sample a genome: uniform biases, each admissible weight wired with
    probability ``connect_prob`` and drawn uniform in ``weight_range``."""
    rows, cols, is_weight = mutable_cells(config)
    n = rows.size
    wired = rng.random(n) < config.connect_prob
    weights = rng.uniform(*config.weight_range, size=n)
    biases = rng.uniform(*config.bias_range, size=n)
    values = np.where(is_weight, np.where(wired, weights, 0.0), biases)
    matrix = np.zeros(config.shape)
    matrix[rows, cols] = values
    return matrix


def single_connection_matrix(config: GenomeConfig, rng: np.random.Generator) -> np.ndarray:
    """Sample a minimal-start genome: uniform biases plus exactly one
    input-to-output connection (feature-selective initialization)."""
    rows, cols, is_weight = mutable_cells(config)
    matrix = np.zeros(config.shape)
    matrix[rows[~is_weight], 0] = rng.uniform(*config.bias_range, size=int((~is_weight).sum()))
    src = int(rng.integers(config.n_inputs))
    dst = config.max_nodes - config.n_outputs + int(rng.integers(config.n_outputs))
    matrix[src, dst + 1] = rng.uniform(*config.weight_range)
    return matrix


def wired_node_count(matrix: np.ndarray, config: GenomeConfig) -> int:
    """Number of nodes touched by at least one nonzero connection."""
    rows, cols, is_weight = mutable_cells(config)
    wired: set[int] = set()
    for r, c in zip(rows[is_weight], cols[is_weight]):
        if matrix[r, c] != 0.0:
            wired.add(int(r))
            wired.add(int(c) - 1)
    return len(wired)
