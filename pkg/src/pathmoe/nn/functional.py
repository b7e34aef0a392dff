"""Stateless numeric primitives on float64 arrays.

These are the spec-level building blocks: shape-checked matrix product,
numerically stable row softmax, ReLU, and L2 normalization. Values are
validated to stay finite on the public surface; the batched training paths
call the raw numpy expressions directly and re-validate at their outputs.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, InputError


def assert_finite(a: np.ndarray, what: str = "array") -> None:
    if not np.all(np.isfinite(a)):
        raise InputError(f"{what} contains NaN or Inf")


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit shape error naming both operands."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    out = a @ b
    assert_finite(out, "matmul result")
    return out


def softmax_row(v: np.ndarray) -> np.ndarray:
    """Stable softmax of a single vector (max subtraction)."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InputError(f"softmax_row expects a non-empty 1-D vector, got shape {v.shape}")
    assert_finite(v, "softmax input")
    e = np.exp(v - v.max())
    return e / e.sum()


def softmax_lastaxis(x: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis of a stack of rows."""
    m = x.max(axis=-1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=-1, keepdims=True)


def masked_softmax_lastaxis(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over positions where mask is True; masked entries are exactly 0.

    Rows with no True entry come out uniform (callers arrange for such rows
    to be discarded downstream).
    """
    neg = np.where(mask, x, -np.inf)
    m = neg.max(axis=-1, keepdims=True)
    all_masked = ~np.isfinite(m)
    m = np.where(all_masked, 0.0, m)
    e = np.where(mask, np.exp(np.where(mask, x, 0.0) - m), 0.0)
    s = e.sum(axis=-1, keepdims=True)
    uniform = np.broadcast_to(1.0 / x.shape[-1], x.shape)
    return np.where(all_masked, uniform, e / np.where(s == 0.0, 1.0, s))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def l2_normalize_rows(x: np.ndarray) -> np.ndarray:
    """Normalize the last axis to unit L2 norm."""
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise InputError("cannot L2-normalize a zero vector")
    return x / n
