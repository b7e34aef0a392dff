"""Differentiable operations with hand-written backward passes.

Each op is a single-use object: `forward` caches whatever the backward pass
needs, `backward` consumes the cache, accumulates parameter gradients in
place, and returns the gradient with respect to the op input. Ops broadcast
over arbitrary leading batch axes (attention and pooling expect one explicit
batch axis); parameter gradients are summed over all batch axes, so the same
code serves single examples and full training batches.

Everything is float64. No graph is built; callers keep the list of ops they
ran and walk it in reverse.
"""

from __future__ import annotations

import numpy as np

from ..errors import CapacityError, ConfigurationError, DimensionError
from .functional import masked_softmax_lastaxis, relu, softmax_lastaxis
from .params import Parameter


def _flat2d(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1, x.shape[-1])


class Linear:
    """y = x @ W.T + b with W: (d_out, d_in), b: (1, d_out) or None."""

    def __init__(self, W: Parameter, b: Parameter | None = None):
        self.W = W
        self.b = b
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.W.shape[1]:
            raise DimensionError(
                f"linear input {x.shape} does not match weight {self.W.shape}"
            )
        self._x = x
        y = x @ self.W.value.T
        if self.b is not None:
            y = y + self.b.value[0]
        return y

    def backward(self, g: np.ndarray) -> np.ndarray:
        x = self._x
        self.W.grad += _flat2d(g).T @ _flat2d(x)
        if self.b is not None:
            self.b.grad += _flat2d(g).sum(axis=0, keepdims=True)
        return g @ self.W.value


class FrozenLinear:
    """Linear map with fixed weights: propagates gradient, accumulates none."""

    def __init__(self, W: np.ndarray, b: np.ndarray | None = None):
        self.W = W
        self.b = b

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.W.shape[1]:
            raise DimensionError(f"input {x.shape} does not match weight {self.W.shape}")
        y = x @ self.W.T
        if self.b is not None:
            y = y + self.b[0]
        return y

    def backward(self, g: np.ndarray) -> np.ndarray:
        return g @ self.W


class LoraLinear:
    """Frozen linear with a trainable low-rank update.

    y = x @ Wf.T + (alpha/r) * x @ A.T @ B.T, Wf: (d_out, d_in) frozen,
    A: (r, d_in), B: (d_out, r). Only A and B receive gradient; with B at
    its zero init the output is bit-identical to the frozen path.
    """

    def __init__(self, W_frozen: np.ndarray, A: Parameter, B: Parameter, alpha: float, r: int):
        if r < 1:
            raise ConfigurationError(f"low-rank update needs rank >= 1, got {r}")
        if A.shape != (r, W_frozen.shape[1]) or B.shape != (W_frozen.shape[0], r):
            raise DimensionError(
                f"adapter shapes A{A.shape}, B{B.shape} do not match frozen {W_frozen.shape} at rank {r}"
            )
        self.Wf = W_frozen
        self.A = A
        self.B = B
        self.scale = alpha / r
        self._x = None
        self._u = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.Wf.shape[1]:
            raise DimensionError(
                f"input {x.shape} does not match frozen weight {self.Wf.shape}"
            )
        self._x = x
        self._u = x @ self.A.value.T
        return x @ self.Wf.T + self.scale * (self._u @ self.B.value.T)

    def backward(self, g: np.ndarray) -> np.ndarray:
        gB = g @ self.B.value
        self.B.grad += self.scale * (_flat2d(g).T @ _flat2d(self._u))
        self.A.grad += self.scale * (_flat2d(gB).T @ _flat2d(self._x))
        return g @ self.Wf + self.scale * (gB @ self.A.value)


class Relu:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0.0
        return relu(x)

    def backward(self, g: np.ndarray) -> np.ndarray:
        return g * self._mask


class Sigmoid:
    def __init__(self):
        self._y = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        y = np.where(x >= 0.0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        self._y = y
        return y

    def backward(self, g: np.ndarray) -> np.ndarray:
        return g * self._y * (1.0 - self._y)


class Mlp:
    """Alternating linear/ReLU stack; the last layer stays linear unless
    final_activation is set."""

    def __init__(self, layers, final_activation: bool = False):
        # layers: sequence of (W: Parameter, b: Parameter | None)
        self.linears = [Linear(W, b) for W, b in layers]
        self.final_activation = final_activation
        self._acts = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._acts = []
        h = x
        last = len(self.linears) - 1
        for i, lin in enumerate(self.linears):
            h = lin.forward(h)
            if i < last or self.final_activation:
                act = Relu()
                h = act.forward(h)
                self._acts.append(act)
            else:
                self._acts.append(None)
        return h

    def backward(self, g: np.ndarray) -> np.ndarray:
        for lin, act in zip(reversed(self.linears), reversed(self._acts)):
            if act is not None:
                g = act.backward(g)
            g = lin.backward(g)
        return g

    def parameters(self):
        out = []
        for lin in self.linears:
            out.append(lin.W)
            if lin.b is not None:
                out.append(lin.b)
        return out


class SelfAttention:
    """Single-head scaled dot-product attention with learnable positions and
    a residual connection.

    Input (B, S, d) or (S, d). Computes h = x + pos[:S], attends h over h,
    and returns ctx @ Wo.T + h. Projections are Linear/LoraLinear ops, so a
    frozen backbone with low-rank adapters and a fully trainable block share
    this code. An optional key_mask (B, S) restricts which positions can be
    attended to; masked positions contribute exactly zero attention weight,
    which is what makes anatomical masking exact.
    """

    def __init__(self, q_proj, k_proj, v_proj, o_proj, pos: Parameter):
        self.q_proj = q_proj
        self.k_proj = k_proj
        self.v_proj = v_proj
        self.o_proj = o_proj
        self.pos = pos
        self._ctx = None

    def forward(self, x: np.ndarray, key_mask: np.ndarray | None = None) -> np.ndarray:
        squeeze = x.ndim == 2
        if squeeze:
            x = x[None]
            if key_mask is not None and key_mask.ndim == 1:
                key_mask = key_mask[None]
        B, S, d = x.shape
        if S > self.pos.shape[0]:
            raise CapacityError(
                f"sequence length {S} exceeds positional capacity {self.pos.shape[0]}"
            )
        if d != self.pos.shape[1]:
            raise DimensionError(f"model width {d} does not match positions {self.pos.shape}")
        h = x + self.pos.value[:S]
        q = self.q_proj.forward(h)
        k = self.k_proj.forward(h)
        v = self.v_proj.forward(h)
        scores = (q @ np.swapaxes(k, -1, -2)) / np.sqrt(d)
        if key_mask is None:
            attn = softmax_lastaxis(scores)
        else:
            attn = masked_softmax_lastaxis(scores, key_mask[:, None, :])
        ctx = attn @ v
        out = self.o_proj.forward(ctx) + h
        self._ctx = (S, d, h, q, k, v, attn, squeeze)
        return out[0] if squeeze else out

    def backward(self, g: np.ndarray) -> np.ndarray:
        S, d, h, q, k, v, attn, squeeze = self._ctx
        if squeeze:
            g = g[None]
        dh = g.copy()
        dctx = self.o_proj.backward(g)
        dv = np.swapaxes(attn, -1, -2) @ dctx
        dattn = dctx @ np.swapaxes(v, -1, -2)
        # softmax backward row-wise; masked entries have attn == 0 so they
        # receive no score gradient automatically
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dscores /= np.sqrt(d)
        dq = dscores @ k
        dk = np.swapaxes(dscores, -1, -2) @ q
        dh += self.q_proj.backward(dq)
        dh += self.k_proj.backward(dk)
        dh += self.v_proj.backward(dv)
        self.pos.grad[:S] += dh.sum(axis=0)
        return dh[0] if squeeze else dh


class MaskedPool:
    """Occupancy-weighted mean over the token axis.

    tokens (B, P, d) with weights (B, P) -> (B, P-pooled d). Rows whose
    weights sum to zero fall back to the unweighted mean; each such row
    bumps counters["degenerate_slices"] when a counter mapping is given.
    Weights are data, not parameters, and receive no gradient.
    """

    def __init__(self):
        self._ctx = None

    def forward(self, tokens: np.ndarray, weights: np.ndarray, counters=None) -> np.ndarray:
        squeeze = tokens.ndim == 2
        if squeeze:
            tokens = tokens[None]
            weights = weights[None]
        if weights.shape != tokens.shape[:2]:
            raise DimensionError(
                f"weights {weights.shape} do not match tokens {tokens.shape}"
            )
        wsum = weights.sum(axis=1)
        degenerate = wsum == 0.0
        if counters is not None and degenerate.any():
            counters["degenerate_slices"] = counters.get("degenerate_slices", 0) + int(
                degenerate.sum()
            )
        P = tokens.shape[1]
        eff_w = np.where(degenerate[:, None], 1.0, weights)
        eff_sum = np.where(degenerate, float(P), wsum)
        out = np.einsum("bp,bpd->bd", eff_w, tokens) / eff_sum[:, None]
        self._ctx = (eff_w, eff_sum, tokens.shape, squeeze)
        return out[0] if squeeze else out

    def backward(self, g: np.ndarray) -> np.ndarray:
        eff_w, eff_sum, shape, squeeze = self._ctx
        if squeeze:
            g = g[None]
        dt = (eff_w / eff_sum[:, None])[:, :, None] * g[:, None, :]
        return dt[0] if squeeze else dt


class SoftmaxPool:
    """Score-and-pool attention over a sequence axis.

    A scorer MLP maps (B, S, d) -> (B, S, 1); scores are softmaxed over S
    and the input rows are combined with those weights into (B, d).
    """

    def __init__(self, scorer: Mlp):
        self.scorer = scorer
        self._ctx = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        squeeze = x.ndim == 2
        if squeeze:
            x = x[None]
        scores = self.scorer.forward(x)[..., 0]
        a = softmax_lastaxis(scores)
        out = np.einsum("bs,bsd->bd", a, x)
        self._ctx = (x, a, squeeze)
        return out[0] if squeeze else out

    def attention_weights(self) -> np.ndarray:
        return self._ctx[1]

    def backward(self, g: np.ndarray) -> np.ndarray:
        x, a, squeeze = self._ctx
        if squeeze:
            g = g[None]
        dx = a[:, :, None] * g[:, None, :]
        da = np.einsum("bd,bsd->bs", g, x)
        dscores = a * (da - (da * a).sum(axis=-1, keepdims=True))
        dx += self.scorer.backward(dscores[..., None])
        return dx[0] if squeeze else dx


class L2Normalize:
    """Row-wise projection onto the unit sphere."""

    def __init__(self):
        self._ctx = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        n = np.linalg.norm(x, axis=-1, keepdims=True)
        y = x / n
        self._ctx = (y, n)
        return y

    def backward(self, g: np.ndarray) -> np.ndarray:
        y, n = self._ctx
        return (g - (g * y).sum(axis=-1, keepdims=True) * y) / n


def run_backward(tape, g: np.ndarray) -> np.ndarray:
    """Walk a list of chained ops in reverse, threading the gradient."""
    for op in reversed(tape):
        g = op.backward(g)
    return g
