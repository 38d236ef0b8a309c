"""
SGD with Nesterov momentum and the step-decay learning-rate schedule.

Update rule, per parameter w with velocity b and gradient g:

    b <- mu * b + g
    w <- w - lr * (g + mu * b)
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from suvr_engine.exceptions import DimensionMismatchError

DEFAULT_BASE_LR = 0.03
DEFAULT_NESTEROV_MU = 0.9
DEFAULT_LR_DECAY = 0.9
DEFAULT_LR_DECAY_EVERY = 40


@dataclass
class OptimizerState:
    velocities: list[np.ndarray]
    mu: float = DEFAULT_NESTEROV_MU
    base_lr: float = DEFAULT_BASE_LR
    epoch: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"Nesterov momentum must lie in [0, 1), got {self.mu}")

    @classmethod
    def zeros_like(
        cls,
        params: Sequence[np.ndarray],
        mu: float = DEFAULT_NESTEROV_MU,
        base_lr: float = DEFAULT_BASE_LR,
    ) -> "OptimizerState":
        return cls([np.zeros_like(p) for p in params], mu=mu, base_lr=base_lr)


def nesterov_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: OptimizerState,
    lr: float,
) -> None:
    """Apply one in-place Nesterov update to every parameter array."""
    if not len(params) == len(grads) == len(state.velocities):
        raise DimensionMismatchError(
            f"{len(params)} parameters, {len(grads)} gradients, {len(state.velocities)} velocity buffers"
        )
    for w, g, b in zip(params, grads, state.velocities, strict=True):
        if not w.shape == g.shape == b.shape:
            raise DimensionMismatchError(
                f"parameter {w.shape}, gradient {g.shape} and velocity {b.shape} disagree"
            )
    mu = state.mu
    for w, g, b in zip(params, grads, state.velocities, strict=True):
        b *= mu
        b += g
        w -= lr * (g + mu * b)


def lr_at_epoch(
    base: float,
    epoch: int,
    decay: float = DEFAULT_LR_DECAY,
    every: int = DEFAULT_LR_DECAY_EVERY,
) -> float:
    """base * decay ** (epoch // every); epochs count from 0."""
    if base <= 0:
        raise ValueError(f"base learning rate must be > 0, got {base}")
    return base * decay ** (epoch // every)
