"""AdamW with decoupled weight decay.

Update per parameter: moments are updated from the current gradient,
bias-corrected, and the weight moves by -lr * (m_hat / (sqrt(v_hat) + eps))
plus a separate -lr * weight_decay * value term. Weight decay never enters
the moment estimates, so a zero-gradient step with decay > 0 strictly
shrinks nonzero weights toward zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass
class AdamWConfig:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.01

    def validate(self) -> "AdamWConfig":
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConfigurationError(f"betas must lie in (0, 1), got {self.beta1}, {self.beta2}")
        if self.learning_rate <= 0.0:
            raise ConfigurationError(f"learning rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0.0:
            raise ConfigurationError(f"weight decay must be >= 0, got {self.weight_decay}")
        return self


def adamw_step(params, cfg: AdamWConfig) -> None:
    """One optimizer step over a list of Parameters with populated grads."""
    cfg.validate()
    for p in params:
        p.step_count += 1
        t = p.step_count
        g = p.grad
        p.m = cfg.beta1 * p.m + (1.0 - cfg.beta1) * g
        p.v = cfg.beta2 * p.v + (1.0 - cfg.beta2) * (g * g)
        m_hat = p.m / (1.0 - cfg.beta1**t)
        v_hat = p.v / (1.0 - cfg.beta2**t)
        p.value -= cfg.learning_rate * (m_hat / (np.sqrt(v_hat) + cfg.epsilon))
        if cfg.weight_decay != 0.0:
            p.value -= cfg.learning_rate * cfg.weight_decay * p.value
