"""Pathway identities and anatomical patch weighting.

Each pathway sees a fixed organ set: the liver pathway pools liver and
spleen, the tumor pathway pools liver plus the portal vein and IVC, and the
general pathway sees everything unmasked. A patch's weight is its summed
occupancy over the pathway's organs, so a patch 30% liver + 20% spleen gets
weight 0.5 on the liver pathway.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from ..cohort.anatomy import ORGANS
from ..errors import DimensionError


class PathwayId(str, Enum):
    GENERAL = "general"
    LIVER = "liver"
    TUMOR = "tumor"


ORGAN_SETS = {
    PathwayId.GENERAL: set(ORGANS),
    PathwayId.LIVER: {"liver", "spleen"},
    PathwayId.TUMOR: {"liver", "portal_vein", "ivc"},
}

_ORGAN_INDEX = {name: i for i, name in enumerate(ORGANS)}


def organ_columns(pathway: PathwayId) -> np.ndarray:
    return np.array(sorted(_ORGAN_INDEX[o] for o in ORGAN_SETS[pathway]))


def anatomical_patch_weights(occupancy: np.ndarray, pathway: PathwayId) -> np.ndarray:
    """Per-patch pooling weights in [0, 1]; (..., P, n_organs) -> (..., P)."""
    occupancy = np.asarray(occupancy, dtype=np.float64)
    if occupancy.shape[-1] != len(ORGANS):
        raise DimensionError(
            f"occupancy last axis {occupancy.shape[-1]} != {len(ORGANS)} organs"
        )
    if pathway == PathwayId.GENERAL:
        return np.ones(occupancy.shape[:-1])
    cols = organ_columns(pathway)
    return np.clip(occupancy[..., cols].sum(axis=-1), 0.0, 1.0)
