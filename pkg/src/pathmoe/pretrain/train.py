"""Contrastive pretraining of one pathway's adapter set.

Each step encodes a batch of (volume, report-text) pairs through the frozen
backbone with the active pathway's adapters, computes the symmetric
contrastive loss, and updates only that pathway's parameters with AdamW.
The frozen weights and every other pathway's adapters are untouched, which
the tests verify by checksum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, TrainingError
from ..nn.optim import AdamWConfig, adamw_step
from ..nn.params import spawn_rng, zero_grads
from .encoders import EncoderStack
from .infonce import info_nce_symmetric
from .pathways import PathwayId


@dataclass
class PretrainConfig:
    tau: float = 0.1
    epochs: int = 25          # 250 at full protocol; 25 is the desk-scale default
    batch_size: int = 32
    learning_rate: float = 1e-4
    lora_rank: int = 4
    lora_alpha: float = 8.0
    weight_decay: float = 0.01

    def validate(self) -> "PretrainConfig":
        if self.tau <= 0.0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.epochs < 1 or self.batch_size < 2:
            raise ConfigurationError("need epochs >= 1 and batch_size >= 2")
        return self


@dataclass
class PretrainResult:
    pathway: str
    epoch_losses: list = field(default_factory=list)
    steps: int = 0

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]


def pretrain_pathway(stack: EncoderStack, pathway: PathwayId, pairs,
                     cfg: PretrainConfig, seed: int = 0,
                     masking: bool = True) -> PretrainResult:
    """Train one pathway on (SyntheticStudy, token-id list) pairs."""
    cfg.validate()
    if len(pairs) == 0:
        raise TrainingError("pretraining dataset is empty")
    params = stack.trainable_parameters(pathway)
    opt = AdamWConfig(learning_rate=cfg.learning_rate, weight_decay=cfg.weight_decay)
    rng = spawn_rng(seed, "pretrain", pathway.value)
    result = PretrainResult(pathway=pathway.value)

    n = len(pairs)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            if idx.size < 2:
                continue  # a single pair carries no contrastive signal
            studies = [pairs[i][0] for i in idx]
            texts = [pairs[i][1] for i in idx]
            img, vol_tape = stack.encode_volumes(studies, pathway, masking=masking)
            txt, txt_tape = stack.encode_reports(texts, pathway)
            loss, g_img, g_txt = info_nce_symmetric(img, txt, cfg.tau)
            zero_grads(params)
            vol_tape.backward(g_img)
            txt_tape.backward(g_txt)
            adamw_step(params, opt)
            losses.append(loss)
            result.steps += 1
        result.epoch_losses.append(float(np.mean(losses)))
    return result


def contrastive_eval_loss(stack: EncoderStack, pathway: PathwayId, pairs,
                          tau: float, batch_size: int = 32,
                          masking: bool = True) -> float:
    """Mean held-out contrastive loss over fixed-order batches."""
    losses = []
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start:start + batch_size]
        if len(chunk) < 2:
            continue
        img, _ = stack.encode_volumes([p[0] for p in chunk], pathway, masking=masking)
        txt, _ = stack.encode_reports([p[1] for p in chunk], pathway)
        loss, _, _ = info_nce_symmetric(img, txt, tau)
        losses.append(loss)
    return float(np.mean(losses))


def retrieval_top1(stack: EncoderStack, pathway: PathwayId, pairs,
                   masking: bool = True) -> float:
    """Image-to-text top-1 retrieval accuracy over one gallery of pairs."""
    img, _ = stack.encode_volumes([p[0] for p in pairs], pathway, masking=masking)
    txt, _ = stack.encode_reports([p[1] for p in pairs], pathway)
    sims = img @ txt.T
    return float(np.mean(np.argmax(sims, axis=1) == np.arange(len(pairs))))
