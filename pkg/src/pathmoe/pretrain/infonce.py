"""Symmetric contrastive loss over matched image/text embedding batches.

loss = (cross-entropy of each image against all texts + cross-entropy of
each text against all images) / 2, with the diagonal as targets and cosine
logits scaled by 1/tau. Gradients with respect to both embedding matrices
are computed in closed form. Inputs must already be unit rows; the check is
a contract, not a convenience normalization.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, InputError


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1)
    return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


def info_nce_symmetric(img_embs: np.ndarray, txt_embs: np.ndarray, tau: float):
    """Returns (loss, grad_img, grad_txt)."""
    img = np.asarray(img_embs, dtype=np.float64)
    txt = np.asarray(txt_embs, dtype=np.float64)
    if img.shape != txt.shape or img.ndim != 2:
        raise DimensionError(f"embedding batches must match: {img.shape} vs {txt.shape}")
    if img.shape[0] < 1:
        raise InputError("contrastive batch must contain at least one pair")
    if tau <= 0.0:
        raise InputError(f"temperature must be positive, got {tau}")
    for name, e in (("image", img), ("text", txt)):
        norms = np.linalg.norm(e, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise InputError(f"{name} embeddings are not L2-normalized (max |n-1| = "
                             f"{np.abs(norms - 1.0).max():.2e})")

    B = img.shape[0]
    logits = (img @ txt.T) / tau
    diag = np.diag(logits)
    loss_i2t = float(np.mean(_logsumexp_rows(logits) - diag))
    loss_t2i = float(np.mean(_logsumexp_rows(logits.T) - diag))
    loss = 0.5 * (loss_i2t + loss_t2i)

    p_row = np.exp(logits - _logsumexp_rows(logits)[:, None])
    p_col = np.exp(logits - _logsumexp_rows(logits.T)[None, :])
    eye = np.eye(B)
    dlogits = ((p_row - eye) + (p_col - eye)) / (2.0 * B)
    grad_img = dlogits @ txt / tau
    grad_txt = dlogits.T @ img / tau
    return loss, grad_img, grad_txt
