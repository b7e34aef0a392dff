"""Report segmentation interface with pluggable corruption modes.

The shipped segmenter is the identity: synthetic reports are generated
pre-split into liver/tumor/neutral segments. Corruption modes implement the
text-grounding ablations:

  identity      keep the generated split
  swapped       exchange the liver and tumor segments
  random_split  pool liver+tumor tokens and re-deal them at random (same
                segment lengths, seeded)
  none          no segmentation: both specific segments carry the full
                liver+tumor content, so every pathway reads the whole report
"""

from __future__ import annotations

import numpy as np

from ..cohort.reports import ReportSegments
from ..errors import ConfigurationError

CORRUPTION_MODES = ("identity", "swapped", "random_split", "none")


def segment_report(segments: ReportSegments, mode: str = "identity",
                   rng: np.random.Generator | None = None) -> ReportSegments:
    segments.validate()
    if mode == "identity":
        return segments
    if mode == "swapped":
        return ReportSegments(
            s_liver=list(segments.s_tumor),
            s_tumor=list(segments.s_liver),
            s_neutral=list(segments.s_neutral),
        ).validate()
    if mode == "random_split":
        if rng is None:
            raise ConfigurationError("random_split requires a seeded rng")
        pooled = list(segments.s_liver) + list(segments.s_tumor)
        order = rng.permutation(len(pooled))
        shuffled = [pooled[i] for i in order]
        k = len(segments.s_liver)
        return ReportSegments(
            s_liver=shuffled[:k],
            s_tumor=shuffled[k:],
            s_neutral=list(segments.s_neutral),
        ).validate()
    if mode == "none":
        merged = list(segments.s_liver) + list(segments.s_tumor)
        return ReportSegments(
            s_liver=merged,
            s_tumor=list(merged),
            s_neutral=list(segments.s_neutral),
        ).validate()
    raise ConfigurationError(
        f"unknown segmentation mode '{mode}'; valid: {', '.join(CORRUPTION_MODES)}"
    )
