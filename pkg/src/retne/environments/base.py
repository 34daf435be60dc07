"""Shared environment plumbing."""

from __future__ import annotations

import numpy as np


class RunningStd:
    """Streaming per-dimension standard deviation (population form).

    Reports 1.0 for every dimension until at least two samples arrived.
    Instances are owned by a single evaluation context and never shared.
    """

    def __init__(self, dim: int):
        self.count = 0
        self._mean = np.zeros(dim)
        self._m2 = np.zeros(dim)

    def update(self, values: np.ndarray) -> None:
        x = np.asarray(values, dtype=float)
        self.count += 1
        delta = x - self._mean
        self._mean += delta / self.count
        self._m2 += delta * (x - self._mean)

    def std(self) -> np.ndarray:
        if self.count < 2:
            return np.ones_like(self._mean)
        return np.sqrt(self._m2 / self.count)
