"""Checkpoint container: named parameter tensors plus provenance metadata.

One JSON format serves pathway encoders and the survival head. Every
checkpoint records the config hash, the cohort hash it was trained on, and
the frozen-backbone checksum, so downstream stages can refuse mismatched
artifacts instead of silently mixing runs. Values are float64 and survive
the JSON round trip exactly (repr-based encoding).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, ParseError
from .nn.params import Parameter
from .pretrain.encoders import EncoderDims, EncoderStack, FrozenBackbone, PathwayAdapters
from .pretrain.pathways import PathwayId
from .survival.head import SurvivalHead

FORMAT_VERSION = 1


def _encode_arrays(named) -> dict:
    return {k: np.asarray(v).tolist() for k, v in named.items()}


def _decode_array(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64)


def _write(path, doc: dict) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(doc, sort_keys=True))


def _read(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format_version {doc.get('format_version')}")
    return doc


def save_pathway_checkpoint(path, stack: EncoderStack, pathway: PathwayId,
                            meta: dict, history=None) -> None:
    ad = stack.adapters[pathway]
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "pathway-encoder",
        "pathway": pathway.value,
        "meta": meta,
        "dims": {k: v for k, v in vars(stack.dims).items()},
        "frozen_checksum": stack.frozen_checksum(),
        "frozen": _encode_arrays(dict(stack.backbone.arrays())),
        "params": _encode_arrays(
            {k: p.value for k, p in ad.named_parameters().items()}
        ),
        "history": list(history or []),
    }
    _write(path, doc)


def load_pathway_checkpoint(path) -> dict:
    doc = _read(path)
    if doc.get("kind") != "pathway-encoder":
        raise ParseError(f"{path}: not a pathway checkpoint")
    return doc


def stack_from_checkpoints(docs: list) -> EncoderStack:
    """Rebuild a full three-pathway stack from per-pathway checkpoints."""
    if len(docs) != 3:
        raise ConsistencyError(f"need exactly 3 pathway checkpoints, got {len(docs)}")
    checksums = {d["frozen_checksum"] for d in docs}
    if len(checksums) != 1:
        raise ConsistencyError(f"checkpoints built on different backbones: {sorted(checksums)}")
    hashes = {d["meta"].get("cohort_hash") for d in docs}
    if len(hashes) != 1:
        raise ConsistencyError(
            f"checkpoints trained on different cohorts: {sorted(map(str, hashes))}"
        )
    dims = EncoderDims(**docs[0]["dims"])
    backbone = FrozenBackbone.__new__(FrozenBackbone)
    frozen = docs[0]["frozen"]
    backbone.patch_embed_W = _decode_array(frozen["patch_embed_W"])
    backbone.patch_embed_b = _decode_array(frozen["patch_embed_b"])
    backbone.attn_Wq = _decode_array(frozen["attn_Wq"])
    backbone.attn_Wk = _decode_array(frozen["attn_Wk"])
    backbone.attn_Wv = _decode_array(frozen["attn_Wv"])
    backbone.attn_Wo = _decode_array(frozen["attn_Wo"])
    backbone.patch_pos = Parameter(_decode_array(frozen["patch_pos"]))
    backbone.text_embed = _decode_array(frozen["text_embed"])
    backbone.text_proj_W = _decode_array(frozen["text_proj_W"])

    adapters = {}
    for doc in docs:
        pw = PathwayId(doc["pathway"])
        ad = PathwayAdapters.__new__(PathwayAdapters)
        for name, value in doc["params"].items():
            setattr(ad, name, Parameter(_decode_array(value)))
        adapters[pw] = ad
    if set(adapters) != set(PathwayId):
        raise ConsistencyError(f"checkpoints cover {sorted(p.value for p in adapters)}, "
                               "need general/liver/tumor")
    stack = EncoderStack(dims, backbone, adapters)
    actual = stack.frozen_checksum()
    expected = docs[0]["frozen_checksum"]
    if actual != expected:
        raise ConsistencyError(
            f"frozen weights do not match their checksum: {actual} vs {expected}"
        )
    return stack


def save_head_checkpoint(path, head: SurvivalHead, meta: dict, history=None) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "survival-head",
        "variant": head.variant,
        "d_emb": head.d_emb,
        "expert_dim": head.expert_dim,
        "alpha_hidden": head.alpha_hidden,
        "meta": meta,
        "params": _encode_arrays({k: p.value for k, p in head.named_parameters().items()}),
        "history": list(history or []),
    }
    _write(path, doc)


def load_head_checkpoint(path) -> tuple:
    """Returns (head, meta)."""
    doc = _read(path)
    if doc.get("kind") != "survival-head":
        raise ParseError(f"{path}: not a survival-head checkpoint")
    rng = np.random.default_rng(0)  # initializer immediately overwritten
    head = SurvivalHead(doc["d_emb"], rng, doc["variant"],
                        expert_dim=doc["expert_dim"], alpha_hidden=doc["alpha_hidden"])
    for name, value in doc["params"].items():
        head.params[name] = Parameter(_decode_array(value))
    return head, doc["meta"]
