"""Offspring operators: local mutation and the two global matrix blends.

Local search perturbs one parent cell by cell.  Global search treats two
parent matrices as endpoints and returns an interior point: the exact
midpoint (binary split) or the golden-section point weighted toward the
first parent.  Because both blends are convex combinations, offspring stay
inside the parents' elementwise hull and the acyclicity constraint is
preserved for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .genome import GenomeConfig, Individual, InvalidGenomeError, create, mutable_cells

GOLDEN_MAJOR = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_MINOR = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class MutationConfig:
    """Per-cell rates for local mutation.

    Each mutable cell sees at most one event, tried in priority order:
    fresh uniform redraw, Gaussian perturbation, connection toggle.
    Redraw and perturbation act on existing entries (biases and wired
    connections); absent connections (weight exactly zero) can only be
    created by the toggle event, and wired ones removed by it, mirroring
    how weight mutation and structural mutation are separate moves in
    topology-evolving search.
    """

    perturb_sigma: float = 0.5
    perturb_prob: float = 0.8
    replace_prob: float = 0.1
    toggle_prob: float = 0.05

    def __post_init__(self) -> None:
        if not self.perturb_sigma > 0.0:
            raise ValueError("perturb_sigma must be positive")
        for name in ("perturb_prob", "replace_prob", "toggle_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


@lru_cache(maxsize=None)
def _cell_bounds(config: GenomeConfig):
    _, _, is_weight = mutable_cells(config)
    lo = np.where(is_weight, config.weight_range[0], config.bias_range[0])
    hi = np.where(is_weight, config.weight_range[1], config.bias_range[1])
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def mutate_near(
    parent: Individual,
    mutation: MutationConfig,
    config: GenomeConfig,
    rng: np.random.Generator,
) -> Individual:
    """Create a nearby individual from one parent.

    Only mutable cells change; everything is clamped back into the
    configured weight/bias ranges and the parent is left untouched.
    """
    rows, cols, is_weight = mutable_cells(config)
    n = rows.size
    values = parent.matrix[rows, cols].copy()
    lo, hi = _cell_bounds(config)

    u = rng.random(n)
    fresh = rng.uniform(lo, hi)
    noise = rng.normal(0.0, mutation.perturb_sigma, size=n)

    p_replace = mutation.replace_prob
    p_perturb = p_replace + mutation.perturb_prob
    p_toggle = p_perturb + mutation.toggle_prob

    entry = ~is_weight | (values != 0.0)  # biases and wired connections
    redraw = (u < p_replace) & entry
    perturb = (u >= p_replace) & (u < p_perturb) & entry
    toggle = (u >= p_perturb) & (u < p_toggle) & is_weight

    values[redraw] = fresh[redraw]
    values[perturb] += noise[perturb]
    values[toggle] = np.where(values[toggle] == 0.0, fresh[toggle], 0.0)
    np.clip(values, lo, hi, out=values)

    child = parent.matrix.copy()
    child[rows, cols] = values
    return create(child, config)


def _blend(f_i: np.ndarray, f_j: np.ndarray, w_i: float, w_j: float, config: GenomeConfig) -> Individual:
    a = np.asarray(f_i, dtype=float)
    b = np.asarray(f_j, dtype=float)
    if a.shape != b.shape:
        raise InvalidGenomeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return create(w_i * a + w_j * b, config)


def binary_combine(f_i: np.ndarray, f_j: np.ndarray, config: GenomeConfig) -> Individual:
    """Global offspring at the exact elementwise midpoint of two parents."""
    return _blend(f_i, f_j, 0.5, 0.5, config)


def golden_combine(f_i: np.ndarray, f_j: np.ndarray, config: GenomeConfig) -> Individual:
    """Global offspring at the golden-section point between two parents.

    The first parent carries the larger coefficient (sqrt(5) - 1) / 2, so
    argument order matters.
    """
    return _blend(f_i, f_j, GOLDEN_MAJOR, GOLDEN_MINOR, config)
