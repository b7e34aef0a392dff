"""Mini-batch Cox training of the survival head.

Embeddings are precomputed by frozen encoders, so each step is: forward the
head over a batch, evaluate the partial likelihood within that batch, and
update head parameters with AdamW. Batches are reshuffled until each one
contains at least one event (the within-batch likelihood is undefined
otherwise); epochs and batch composition are deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, TrainingError
from ..nn.optim import AdamWConfig, adamw_step
from ..nn.params import spawn_rng, zero_grads
from .cox import cox_nll
from .head import SurvivalHead


@dataclass
class SurvivalTrainConfig:
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 1e-4
    tie_handling: str = "breslow"
    weight_decay: float = 0.01

    def validate(self) -> "SurvivalTrainConfig":
        if self.epochs < 1 or self.batch_size < 2:
            raise ConfigurationError("need epochs >= 1 and batch_size >= 2")
        if self.learning_rate <= 0.0:
            raise ConfigurationError("learning_rate must be positive")
        if self.tie_handling != "breslow":
            raise ConfigurationError(
                f"unsupported tie handling '{self.tie_handling}' (only breslow)"
            )
        return self


@dataclass
class SurvivalTrainResult:
    epoch_losses: list = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]


def _event_covering_batches(n: int, batch_size: int, events: np.ndarray,
                            rng: np.random.Generator, max_tries: int = 500):
    """Shuffle into contiguous batches, rejecting splits with eventless batches.

    If the event count cannot cover every batch, eventless batches are
    dropped for that epoch instead of looping forever.
    """
    n_batches = (n + batch_size - 1) // batch_size
    coverable = int(events.sum()) >= n_batches
    order = rng.permutation(n)
    for _ in range(max_tries):
        batches = [order[s:s + batch_size] for s in range(0, n, batch_size)]
        if not coverable or all(events[b].any() for b in batches):
            break
        order = rng.permutation(n)
    return [b for b in batches if events[b].any() and b.size >= 2]


def train_survival(head: SurvivalHead, z_base: np.ndarray, z_liver: np.ndarray,
                   z_tumor: np.ndarray, times: np.ndarray, events: np.ndarray,
                   cfg: SurvivalTrainConfig, seed: int = 0) -> SurvivalTrainResult:
    cfg.validate()
    n = len(times)
    if n < 2:
        raise TrainingError("need at least two patients")
    if int(np.asarray(events).sum()) == 0:
        raise TrainingError("cohort has no observed events; Cox training impossible")
    events = np.asarray(events, dtype=bool)
    times = np.asarray(times, dtype=np.float64)

    params = head.parameters()
    opt = AdamWConfig(learning_rate=cfg.learning_rate, weight_decay=cfg.weight_decay)
    rng = spawn_rng(seed, "survival-train")
    result = SurvivalTrainResult()

    for _ in range(cfg.epochs):
        losses = []
        for batch in _event_covering_batches(n, cfg.batch_size, events, rng):
            risks = head.forward(z_base[batch], z_liver[batch], z_tumor[batch])
            loss, g = cox_nll(risks, times[batch], events[batch])
            zero_grads(params)
            head.backward(g)
            adamw_step(params, opt)
            losses.append(loss)
        result.epoch_losses.append(float(np.mean(losses)))
    return result
