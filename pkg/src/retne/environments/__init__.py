from .base import RunningStd
from .cartpole import CartPoleConfig, CartPoleEnv, cartpole_fitness, cartpole_step
from .gates import MAX_REWARD, TRUTH_TABLES, GateEnv, GateTask, gate_fitness
from .landscape import (
    GridEnv,
    GridLandscape,
    LandscapeFormatError,
    RastriginEnv,
    grid_fitness,
    load_grid_landscape,
    position,
    position_config,
    rastrigin,
)
from .noise import NOISE_KINDS, NoiseConfig, apply_gaussian_noise, apply_reverse_noise

__all__ = [
    "RunningStd",
    "CartPoleConfig",
    "CartPoleEnv",
    "cartpole_fitness",
    "cartpole_step",
    "MAX_REWARD",
    "TRUTH_TABLES",
    "GateEnv",
    "GateTask",
    "gate_fitness",
    "GridEnv",
    "GridLandscape",
    "LandscapeFormatError",
    "RastriginEnv",
    "grid_fitness",
    "load_grid_landscape",
    "position",
    "position_config",
    "rastrigin",
    "NOISE_KINDS",
    "NoiseConfig",
    "apply_gaussian_noise",
    "apply_reverse_noise",
]
