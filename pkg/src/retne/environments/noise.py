"""Observation perturbations for robustness testing.

Gaussian noise adds zero-mean jitter scaled by the noise level times the
running standard deviation of everything observed so far.  Reverse noise
occasionally hands the controller the exact negation of its observation;
because a permanently reversed world would be as learnable as the original,
the flip probability is the level diluted by a constant factor.

Both wrappers are exact identities (bitwise, consuming no randomness) at
level zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import RunningStd

NOISE_KINDS = ("none", "gaussian", "reverse")


@dataclass(frozen=True)
class NoiseConfig:
    kind: str = "none"
    level: float = 0.0
    gaussian_peak: float = 0.20
    reverse_dilution: float = 0.5
    normal_min: float = 0.05
    normal_max: float = 0.10

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"noise level must lie in [0, 1], got {self.level}")


def apply_gaussian_noise(
    obs: np.ndarray,
    noise: NoiseConfig,
    stats: RunningStd,
    rng: np.random.Generator,
) -> np.ndarray:
    """Add per-dimension Normal(0, level * running_std) jitter.

    ``stats`` is read, not updated; the caller records observations into
    it as they happen.
    """
    if noise.level == 0.0:
        return obs
    scale = noise.level * stats.std()
    return obs + rng.standard_normal(len(obs)) * scale


def apply_reverse_noise(
    obs: np.ndarray, noise: NoiseConfig, rng: np.random.Generator
) -> np.ndarray:
    """Return the exact negation of ``obs`` with the diluted flip probability."""
    if noise.level == 0.0:
        return obs
    if rng.random() < noise.level * noise.reverse_dilution:
        return -obs
    return obs
