"""Tokenized three-segment reports quantized from latent factors.

The vocabulary is partitioned into disjoint sub-ranges per segment so that
swapping or shuffling segments is a true corruption: a liver token can never
be mistaken for a tumor token. Each latent coordinate is quantized into one
of eight bins at the standard-normal octiles (one boundary sits exactly at
zero, so the sign of any coordinate is recoverable from its token).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ..errors import InputError

VOCAB_SIZE = 256
N_BINS = 8
LIVER_BASE = 0
TUMOR_BASE = 64
NEUTRAL_BASE = 128
SEGMENT_RANGES = {
    "liver": (LIVER_BASE, LIVER_BASE + 64),
    "tumor": (TUMOR_BASE, TUMOR_BASE + 64),
    "neutral": (NEUTRAL_BASE, NEUTRAL_BASE + 64),
}

_BIN_EDGES = ndtri(np.arange(1, N_BINS) / N_BINS)


@dataclass
class ReportSegments:
    s_liver: list
    s_tumor: list
    s_neutral: list

    def validate(self) -> "ReportSegments":
        for name, seg in (("liver", self.s_liver), ("tumor", self.s_tumor),
                          ("neutral", self.s_neutral)):
            if len(seg) == 0:
                raise InputError(f"report segment '{name}' is empty")
            for t in seg:
                if not (0 <= t < VOCAB_SIZE):
                    raise InputError(f"token {t} outside vocabulary [0, {VOCAB_SIZE})")
        return self

    def full_report(self) -> list:
        return list(self.s_liver) + list(self.s_tumor) + list(self.s_neutral)


def quantize_factor(factor: np.ndarray, base: int) -> list:
    """One token per latent coordinate: base + coord * N_BINS + bin."""
    if base + factor.shape[0] * N_BINS > base + 64:
        raise InputError(f"factor of dim {factor.shape[0]} overflows its sub-vocabulary")
    bins = np.searchsorted(_BIN_EDGES, factor)
    return [int(base + j * N_BINS + b) for j, b in enumerate(bins)]


def render_report(liver_factor: np.ndarray, tumor_factor: np.ndarray,
                  neutral_context: np.ndarray) -> ReportSegments:
    """Deterministic quantization of the three latent vectors."""
    return ReportSegments(
        s_liver=quantize_factor(liver_factor, LIVER_BASE),
        s_tumor=quantize_factor(tumor_factor, TUMOR_BASE),
        s_neutral=quantize_factor(neutral_context, NEUTRAL_BASE),
    ).validate()
