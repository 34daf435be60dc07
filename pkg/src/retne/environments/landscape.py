"""Function landscapes searched directly in genome space.

For landscape tasks the genome is shrunk to its smallest useful form: a
two-node matrix whose two free cells (one bias, one weight) act as a 2-D
search point.  The usual operators then move points around the plane, and
fitness is read straight off the landscape instead of a decoded network.

Ships the Rastrigin benchmark and a loader for rectangular CSV height
grids sampled from terrain data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..genome import GenomeConfig, Individual, mutable_cells


class LandscapeFormatError(ValueError):
    """A grid file that cannot be parsed into a rectangular height field."""


def rastrigin(x) -> float:
    """Rastrigin value ``10 n + sum(x_i^2 - 10 cos(2 pi x_i))``; minimum 0 at the origin."""
    arr = np.asarray(x, dtype=float)
    if not np.isfinite(arr).all():
        raise ValueError("rastrigin input must be finite")
    return float(10.0 * arr.size + np.sum(arr * arr - 10.0 * np.cos(2.0 * math.pi * arr)))


@dataclass(frozen=True)
class GridLandscape:
    heights: np.ndarray

    def __post_init__(self) -> None:
        h = self.heights
        if h.ndim != 2 or h.size == 0:
            raise LandscapeFormatError("height grid must be a non-empty 2-D array")
        if not np.isfinite(h).all():
            raise LandscapeFormatError("height grid contains non-finite values")
        h.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.heights.shape


def load_grid_landscape(path) -> GridLandscape:
    """Read a plain CSV of comma-separated heights, one grid row per line."""
    rows: list[list[float]] = []
    with open(path, newline="") as handle:
        for line_no, record in enumerate(csv.reader(handle), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue  # blank line
            values = []
            for col_no, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise LandscapeFormatError(
                        f"{path}: non-numeric cell at row {line_no}, column {col_no}: {cell!r}"
                    ) from None
            if rows and len(values) != len(rows[0]):
                raise LandscapeFormatError(
                    f"{path}: row {line_no} has {len(values)} columns, expected {len(rows[0])}"
                )
            rows.append(values)
    if not rows:
        raise LandscapeFormatError(f"{path}: empty grid file")
    return GridLandscape(np.array(rows, dtype=float))


def grid_fitness(pos, landscape: GridLandscape) -> float:
    """Bilinear height at ``pos = (row, col)``, clamped to the grid bounds."""
    heights = landscape.heights
    n_rows, n_cols = heights.shape
    r = min(max(float(pos[0]), 0.0), n_rows - 1.0)
    c = min(max(float(pos[1]), 0.0), n_cols - 1.0)
    r0 = min(int(r), n_rows - 2) if n_rows > 1 else 0
    c0 = min(int(c), n_cols - 2) if n_cols > 1 else 0
    r1 = min(r0 + 1, n_rows - 1)
    c1 = min(c0 + 1, n_cols - 1)
    fr = r - r0
    fc = c - c0
    return float(
        (1.0 - fr) * (1.0 - fc) * heights[r0, c0]
        + (1.0 - fr) * fc * heights[r0, c1]
        + fr * (1.0 - fc) * heights[r1, c0]
        + fr * fc * heights[r1, c1]
    )


def position_config(
    first_range: tuple[float, float], second_range: tuple[float, float]
) -> GenomeConfig:
    """Genome config whose two free cells span the given 2-D box."""
    return GenomeConfig(
        n_inputs=1,
        n_outputs=1,
        max_nodes=2,
        activation="sigmoid",
        bias_range=first_range,
        weight_range=second_range,
        connect_prob=1.0,
    )


def position(matrix: np.ndarray, config: GenomeConfig) -> np.ndarray:
    """Free-cell values of a landscape genome, in mutable-cell order."""
    rows, cols, _ = mutable_cells(config)
    return matrix[rows, cols]


class RastriginEnv:
    """Deterministic 2-D Rastrigin minimization (fitness is the negated value)."""

    n_inputs = 1
    n_outputs = 1
    deterministic = True

    DOMAIN = (-5.12, 5.12)

    def __init__(self, config: GenomeConfig | None = None):
        self.config = config if config is not None else position_config(self.DOMAIN, self.DOMAIN)

    def evaluate(self, individual: Individual, rng: np.random.Generator) -> float:
        return -rastrigin(position(individual.matrix, self.config))


class GridEnv:
    """Deterministic hill climb on a height grid (fitness is the height)."""

    n_inputs = 1
    n_outputs = 1
    deterministic = True

    def __init__(self, landscape: GridLandscape, config: GenomeConfig | None = None):
        self.landscape = landscape
        n_rows, n_cols = landscape.shape
        if config is None:
            # degenerate 1-wide grids still need lo < hi; positions clamp anyway
            config = position_config(
                (0.0, float(max(n_rows - 1, 1))), (0.0, float(max(n_cols - 1, 1)))
            )
        self.config = config

    def evaluate(self, individual: Individual, rng: np.random.Generator) -> float:
        return grid_fitness(position(individual.matrix, self.config), self.landscape)
