"""Frozen dual encoders with per-pathway trainable adapters.

Image side: patch tokens -> frozen linear embed -> one frozen self-attention
block over the patches of each slice (low-rank adapters on its query/value
projections) -> occupancy-weighted pooling with the pathway's organ weights
-> trainable slice aggregator (self-attention with learnable positions) ->
trainable score-and-pool attention over slices -> trainable projection ->
unit sphere.

Text side: frozen token embedding table -> mean pool -> frozen projection
with a low-rank adapter -> unit sphere.

The backbone is initialized once from a seed and never updated; training
touches only the active pathway's adapter set. Anatomical masking is exact:
patches with zero weight for a pathway are excluded from the attention keys
and pooled with weight zero, so their content cannot reach the embedding.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..cohort.anatomy import D_TOK, N_PATCHES
from ..cohort.reports import ReportSegments, VOCAB_SIZE
from ..errors import ConfigurationError, DimensionError, InputError
from ..nn.ops import (
    L2Normalize,
    Linear,
    LoraLinear,
    FrozenLinear,
    MaskedPool,
    Mlp,
    SelfAttention,
    SoftmaxPool,
)
from ..nn.params import Parameter, make_rng, spawn_rng
from .pathways import PathwayId, anatomical_patch_weights


@dataclass
class EncoderDims:
    d_tok: int = D_TOK
    d_model: int = 32
    d_txt: int = 96
    d_emb: int = 64
    vocab: int = VOCAB_SIZE
    lora_rank: int = 4
    lora_alpha: float = 8.0
    patch_capacity: int = N_PATCHES
    slice_capacity: int = 8
    pool_hidden: int = 16

    def validate(self) -> "EncoderDims":
        if self.lora_rank < 1:
            raise ConfigurationError(f"lora_rank must be >= 1, got {self.lora_rank}")
        return self


class FrozenBackbone:
    """Shared weights, fixed after seeded init."""

    def __init__(self, dims: EncoderDims, rng: np.random.Generator):
        d = dims.d_model
        self.patch_embed_W = rng.normal(0.0, dims.d_tok**-0.5, (d, dims.d_tok))
        self.patch_embed_b = np.zeros((1, d))
        self.attn_Wq = rng.normal(0.0, d**-0.5, (d, d))
        self.attn_Wk = rng.normal(0.0, d**-0.5, (d, d))
        self.attn_Wv = rng.normal(0.0, d**-0.5, (d, d))
        self.attn_Wo = rng.normal(0.0, d**-0.5, (d, d))
        # positional rows live in a Parameter for the attention op but are
        # excluded from every optimizer: frozen by omission
        self.patch_pos = Parameter(rng.normal(0.0, 0.1, (dims.patch_capacity, d)))
        self.text_embed = rng.normal(0.0, dims.d_txt**-0.5, (dims.vocab, dims.d_txt))
        self.text_proj_W = rng.normal(0.0, dims.d_txt**-0.5, (dims.d_emb, dims.d_txt))

    def arrays(self):
        return [
            ("patch_embed_W", self.patch_embed_W),
            ("patch_embed_b", self.patch_embed_b),
            ("attn_Wq", self.attn_Wq),
            ("attn_Wk", self.attn_Wk),
            ("attn_Wv", self.attn_Wv),
            ("attn_Wo", self.attn_Wo),
            ("patch_pos", self.patch_pos.value),
            ("text_embed", self.text_embed),
            ("text_proj_W", self.text_proj_W),
        ]

    def checksum(self) -> str:
        h = hashlib.sha256()
        for name, a in self.arrays():
            h.update(name.encode())
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


class PathwayAdapters:
    """Everything trainable for one pathway."""

    def __init__(self, dims: EncoderDims, rng: np.random.Generator):
        d = dims.d_model
        r = dims.lora_rank
        # low-rank update starts at zero effect: A gaussian, B zero
        self.lora_q_A = Parameter(rng.normal(0.0, 0.02, (r, d)))
        self.lora_q_B = Parameter(np.zeros((d, r)))
        self.lora_v_A = Parameter(rng.normal(0.0, 0.02, (r, d)))
        self.lora_v_B = Parameter(np.zeros((d, r)))
        self.lora_txt_A = Parameter(rng.normal(0.0, 0.02, (r, dims.d_txt)))
        self.lora_txt_B = Parameter(np.zeros((dims.d_emb, r)))
        self.agg_Wq = Parameter(rng.normal(0.0, d**-0.5, (d, d)))
        self.agg_Wk = Parameter(rng.normal(0.0, d**-0.5, (d, d)))
        self.agg_Wv = Parameter(rng.normal(0.0, d**-0.5, (d, d)))
        self.agg_Wo = Parameter(rng.normal(0.0, d**-0.5, (d, d)))
        self.agg_pos = Parameter(rng.normal(0.0, 0.1, (dims.slice_capacity, d)))
        self.pool_W1 = Parameter(rng.normal(0.0, d**-0.5, (dims.pool_hidden, d)))
        self.pool_b1 = Parameter(np.zeros((1, dims.pool_hidden)))
        self.pool_W2 = Parameter(rng.normal(0.0, dims.pool_hidden**-0.5, (1, dims.pool_hidden)))
        self.pool_b2 = Parameter(np.zeros((1, 1)))
        self.proj_W = Parameter(rng.normal(0.0, d**-0.5, (dims.d_emb, d)))
        self.proj_b = Parameter(np.zeros((1, dims.d_emb)))

    def named_parameters(self) -> dict:
        return {k: v for k, v in vars(self).items() if isinstance(v, Parameter)}

    def parameters(self):
        return list(self.named_parameters().values())


class VolumeTape:
    """Reverse pass through one batched volume encoding."""

    def __init__(self, ops, batch_shape):
        self.ops = ops
        self.batch_shape = batch_shape  # (B, S, d_model)

    def backward(self, g_emb: np.ndarray) -> None:
        l2, proj, pooler, agg, pool, attn = self.ops
        B, S, d = self.batch_shape
        g = l2.backward(g_emb)
        g = proj.backward(g)
        g = pooler.backward(g)
        g = agg.backward(g)
        g = g.reshape(B * S, d)
        g = pool.backward(g)
        attn.backward(g)


class ReportTape:
    def __init__(self, ops):
        self.ops = ops

    def backward(self, g_emb: np.ndarray) -> None:
        l2, proj = self.ops
        proj.backward(l2.backward(g_emb))


def pathway_text(segments: ReportSegments, pathway: PathwayId) -> list:
    """Token routing: each pathway sees its segment plus the neutral context;
    the general pathway sees the whole report."""
    if pathway == PathwayId.LIVER:
        return list(segments.s_liver) + list(segments.s_neutral)
    if pathway == PathwayId.TUMOR:
        return list(segments.s_tumor) + list(segments.s_neutral)
    return segments.full_report()


class EncoderStack:
    def __init__(self, dims: EncoderDims, backbone: FrozenBackbone, adapters: dict):
        self.dims = dims.validate()
        self.backbone = backbone
        self.adapters = adapters  # PathwayId -> PathwayAdapters
        self.counters = {}

    # -- forward passes ------------------------------------------------

    def encode_volumes(self, studies, pathway: PathwayId, masking: bool = True):
        """Batched image encoding: list of studies -> ((B, d_emb), VolumeTape)."""
        dims = self.dims
        ad = self.adapters[pathway]
        bb = self.backbone
        tokens = np.stack([s.patch_tokens for s in studies])
        occupancy = np.stack([s.occupancy for s in studies])
        B, S, P, dt = tokens.shape
        if dt != dims.d_tok:
            raise DimensionError(f"patch token dim {dt} != configured {dims.d_tok}")
        if P > dims.patch_capacity:
            raise DimensionError(f"{P} patches exceed capacity {dims.patch_capacity}")

        if masking:
            weights = anatomical_patch_weights(occupancy, pathway)
        else:
            weights = np.ones((B, S, P))
        flat_w = weights.reshape(B * S, P)

        embed = FrozenLinear(bb.patch_embed_W, bb.patch_embed_b)
        x = embed.forward(tokens.reshape(B * S, P, dt))

        attn = SelfAttention(
            q_proj=LoraLinear(bb.attn_Wq, ad.lora_q_A, ad.lora_q_B,
                              dims.lora_alpha, dims.lora_rank),
            k_proj=FrozenLinear(bb.attn_Wk),
            v_proj=LoraLinear(bb.attn_Wv, ad.lora_v_A, ad.lora_v_B,
                              dims.lora_alpha, dims.lora_rank),
            o_proj=FrozenLinear(bb.attn_Wo),
            pos=bb.patch_pos,
        )
        key_mask = None
        if masking and pathway != PathwayId.GENERAL:
            key_mask = flat_w > 0.0
        h = attn.forward(x, key_mask=key_mask)

        pool = MaskedPool()
        slice_embs = pool.forward(h, flat_w, counters=self.counters)
        slice_embs = slice_embs.reshape(B, S, dims.d_model)

        agg = SelfAttention(
            q_proj=Linear(ad.agg_Wq), k_proj=Linear(ad.agg_Wk),
            v_proj=Linear(ad.agg_Wv), o_proj=Linear(ad.agg_Wo), pos=ad.agg_pos,
        )
        agg_out = agg.forward(slice_embs)

        pooler = SoftmaxPool(Mlp([(ad.pool_W1, ad.pool_b1), (ad.pool_W2, ad.pool_b2)]))
        pooled = pooler.forward(agg_out)

        proj = Linear(ad.proj_W, ad.proj_b)
        l2 = L2Normalize()
        emb = l2.forward(proj.forward(pooled))

        tape = VolumeTape([l2, proj, pooler, agg, pool, attn], (B, S, dims.d_model))
        return emb, tape

    def encode_reports(self, token_seqs, pathway: PathwayId):
        """Batched text encoding: list of token-id lists -> ((B, d_emb), ReportTape)."""
        dims = self.dims
        ad = self.adapters[pathway]
        bb = self.backbone
        pooled = np.zeros((len(token_seqs), dims.d_txt))
        for i, seq in enumerate(token_seqs):
            if len(seq) == 0:
                raise InputError("cannot encode an empty token sequence")
            ids = np.asarray(seq, dtype=np.int64)
            if ids.min() < 0 or ids.max() >= dims.vocab:
                raise InputError(
                    f"token id outside vocabulary [0, {dims.vocab}): "
                    f"{int(ids.min())}..{int(ids.max())}"
                )
            pooled[i] = bb.text_embed[ids].mean(axis=0)
        proj = LoraLinear(bb.text_proj_W, ad.lora_txt_A, ad.lora_txt_B,
                          dims.lora_alpha, dims.lora_rank)
        l2 = L2Normalize()
        emb = l2.forward(proj.forward(pooled))
        return emb, ReportTape([l2, proj])

    # -- single-item conveniences ---------------------------------------

    def encode_volume(self, study, pathway: PathwayId, masking: bool = True) -> np.ndarray:
        emb, _ = self.encode_volumes([study], pathway, masking=masking)
        return emb[0]

    def encode_report(self, segments: ReportSegments, pathway: PathwayId) -> np.ndarray:
        segments.validate()
        emb, _ = self.encode_reports([pathway_text(segments, pathway)], pathway)
        return emb[0]

    def trainable_parameters(self, pathway: PathwayId):
        return self.adapters[pathway].parameters()

    def frozen_checksum(self) -> str:
        return self.backbone.checksum()


def build_encoder_stack(dims: EncoderDims | None = None, seed: int = 0) -> EncoderStack:
    dims = (dims or EncoderDims()).validate()
    backbone = FrozenBackbone(dims, spawn_rng(seed, "backbone"))
    adapters = {
        p: PathwayAdapters(dims, spawn_rng(seed, "adapters", p.value)) for p in PathwayId
    }
    return EncoderStack(dims, backbone, adapters)
