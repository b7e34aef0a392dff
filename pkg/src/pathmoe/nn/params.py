"""Trainable parameters and seeded initialization.

Every trainable tensor is a Parameter: a float64 matrix plus its gradient
and AdamW moment buffers, all sharing one shape. Randomness everywhere in
the package goes through numpy's PCG64 generator so that a given seed
reproduces runs bit-for-bit across platforms.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError


def make_rng(seed) -> np.random.Generator:
    """Seeded PCG64 generator. Accepts an int or a SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rng(seed: int, *labels) -> np.random.Generator:
    """Independent named stream derived from (seed, labels).

    Labels are hashed into the seed entropy, so streams like
    spawn_rng(seed, "survival") and spawn_rng(seed, "render") never
    collide and can be re-derived independently of draw order.
    """
    entropy = [int(seed) & 0xFFFFFFFF]
    for label in labels:
        if isinstance(label, str):
            entropy.extend(label.encode("utf-8"))
        else:
            entropy.append(int(label) & 0xFFFFFFFF)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


class Parameter:
    """A trainable matrix with gradient and first/second moment state."""

    __slots__ = ("value", "grad", "m", "v", "step_count")

    def __init__(self, value: np.ndarray):
        value = np.asarray(value, dtype=np.float64)
        if value.ndim != 2:
            raise DimensionError(f"Parameter value must be 2-D, got shape {value.shape}")
        self.value = value
        self.grad = np.zeros_like(value)
        self.m = np.zeros_like(value)
        self.v = np.zeros_like(value)
        self.step_count = 0

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def copy(self) -> "Parameter":
        p = Parameter(self.value.copy())
        p.grad = self.grad.copy()
        p.m = self.m.copy()
        p.v = self.v.copy()
        p.step_count = self.step_count
        return p


def gaussian_param(rng: np.random.Generator, rows: int, cols: int, std: float) -> Parameter:
    return Parameter(rng.normal(0.0, std, size=(rows, cols)))


def zeros_param(rows: int, cols: int) -> Parameter:
    return Parameter(np.zeros((rows, cols)))


def zero_grads(params) -> None:
    for p in params:
        p.zero_grad()
