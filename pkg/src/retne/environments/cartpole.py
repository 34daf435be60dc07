"""Classic cart-pole balancing with optional observation noise.

A controller sees the state ``(x, x_dot, theta, theta_dot)`` and pushes
the cart left or right with a fixed force.  An episode ends when the pole
leans past the angle limit, the cart leaves the track, or the step cap is
reached; each survived step is worth one reward point.  Fitness is the
mean fraction of the step cap survived over a batch of episodes, so it
always lies in [0, 1].

Episodes within one evaluation are rolled out side by side as numpy
batches; the scalar :func:`cartpole_step` implements the identical
dynamics for one state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..genome import Individual, Network
from .base import RunningStd
from .noise import NoiseConfig, apply_gaussian_noise, apply_reverse_noise


@dataclass(frozen=True)
class CartPoleConfig:
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    pole_half_length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02
    angle_limit: float = math.radians(15.0)
    x_limit: float = 2.4
    episode_steps: int = 500
    episodes_per_eval: int = 20
    action_threshold: float = 0.5

    def __post_init__(self) -> None:
        for name in (
            "gravity", "cart_mass", "pole_mass", "pole_half_length",
            "force_mag", "tau", "angle_limit", "x_limit",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.episode_steps < 1 or self.episodes_per_eval < 1:
            raise ValueError("episode_steps and episodes_per_eval must be at least 1")


def cartpole_step(
    state: tuple[float, float, float, float], action: str, config: CartPoleConfig
) -> tuple[float, float, float, float]:
    """Advance one state by one explicit-Euler step under a left/right push."""
    if action == "right":
        force = config.force_mag
    elif action == "left":
        force = -config.force_mag
    else:
        raise ValueError(f"action must be 'left' or 'right', got {action!r}")
    x, x_dot, theta, theta_dot = state
    sin = math.sin(theta)
    cos = math.cos(theta)
    total_mass = config.cart_mass + config.pole_mass
    pml = config.pole_mass * config.pole_half_length
    temp = (force + pml * theta_dot * theta_dot * sin) / total_mass
    theta_acc = (config.gravity * sin - cos * temp) / (
        config.pole_half_length * (4.0 / 3.0 - config.pole_mass * cos * cos / total_mass)
    )
    x_acc = temp - pml * theta_acc * cos / total_mass
    tau = config.tau
    return (
        x + tau * x_dot,
        x_dot + tau * x_acc,
        theta + tau * theta_dot,
        theta_dot + tau * theta_acc,
    )


def _step_batch(states: np.ndarray, force: np.ndarray, config: CartPoleConfig) -> np.ndarray:
    x, x_dot, theta, theta_dot = states.T
    sin = np.sin(theta)
    cos = np.cos(theta)
    total_mass = config.cart_mass + config.pole_mass
    pml = config.pole_mass * config.pole_half_length
    temp = (force + pml * theta_dot * theta_dot * sin) / total_mass
    theta_acc = (config.gravity * sin - cos * temp) / (
        config.pole_half_length * (4.0 / 3.0 - config.pole_mass * cos * cos / total_mass)
    )
    x_acc = temp - pml * theta_acc * cos / total_mass
    tau = config.tau
    return np.column_stack(
        (
            x + tau * x_dot,
            x_dot + tau * x_acc,
            theta + tau * theta_dot,
            theta_dot + tau * theta_acc,
        )
    )


def cartpole_fitness(
    network: Network,
    config: CartPoleConfig,
    noise: NoiseConfig,
    rng: np.random.Generator,
    stats: RunningStd | None = None,
) -> float:
    """Mean survived fraction over a batch of episodes.

    Start states are uniform in [-0.05, 0.05]^4; the controller pushes
    right whenever its output exceeds the action threshold.  Observed
    states pass through the configured noise wrapper; raw states feed the
    running statistics that scale Gaussian noise.
    """
    if (network.n_inputs, network.n_outputs) != (4, 1):
        raise ValueError(
            f"cart-pole needs a 4-input / 1-output network, got "
            f"{network.n_inputs} / {network.n_outputs}"
        )
    gaussian = noise.kind == "gaussian" and noise.level > 0.0
    reverse = noise.kind == "reverse" and noise.level > 0.0
    if gaussian and stats is None:
        stats = RunningStd(4)

    n = config.episodes_per_eval
    states = rng.uniform(-0.05, 0.05, size=(n, 4))
    survived = np.full(n, config.episode_steps, dtype=float)
    alive_ids = np.arange(n)
    for t in range(config.episode_steps):
        if gaussian:
            for row in states:
                stats.update(row)
            obs = np.stack([apply_gaussian_noise(row, noise, stats, rng) for row in states])
        elif reverse:
            obs = np.stack([apply_reverse_noise(row, noise, rng) for row in states])
        else:
            obs = states
        out = network.forward_batch(obs)[:, 0]
        force = np.where(out > config.action_threshold, config.force_mag, -config.force_mag)
        states = _step_batch(states, force, config)
        dead = (np.abs(states[:, 0]) > config.x_limit) | (
            np.abs(states[:, 2]) > config.angle_limit
        )
        if dead.any():
            survived[alive_ids[dead]] = t + 1
            keep = ~dead
            states = states[keep]
            alive_ids = alive_ids[keep]
            if alive_ids.size == 0:
                break
    return float(np.mean(survived / config.episode_steps))


class CartPoleEnv:
    """Stochastic environment wrapper; one instance per run.

    The Gaussian noise statistics accumulate over every state this
    instance observes, so evaluations must happen in a single sequential
    context (run-level parallelism is fine, each run owns an instance).
    """

    n_inputs = 4
    n_outputs = 1
    deterministic = False

    def __init__(self, config: CartPoleConfig | None = None, noise: NoiseConfig | None = None):
        self.config = config if config is not None else CartPoleConfig()
        self.noise = noise if noise is not None else NoiseConfig()
        self.stats = RunningStd(4)

    def evaluate(self, individual: Individual, rng: np.random.Generator) -> float:
        return cartpole_fitness(
            individual.network, self.config, self.noise, rng, stats=self.stats
        )
