"""Residual mixture-of-experts survival head over frozen pathway embeddings.

The full head computes, per patient,

    risk = base(z_base) + alpha * (w_liver * dr_liver + w_tumor * dr_tumor)

where the expert deltas come from two-layer MLPs plus linear risk heads, the
gate weights are a softmax over a linear map of [z_base; dz; |dz|] with
dz = z_liver - z_tumor, and alpha = sigmoid(MLP([z_base; e_liver; e_tumor]))
modulates how much the experts correct the base risk.

Ablation variants drop terms from that sum: with a single expert the gate
degenerates to weight 1 and the gate network is omitted; the joint variant
sums base and both expert deltas with no gate and no alpha; base_only is the
bare base head. Embeddings never receive gradient here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import ConfigurationError, DimensionError
from ..nn.functional import softmax_lastaxis
from ..nn.ops import Linear, Mlp, Sigmoid
from ..nn.params import Parameter


class Phenotype(str, Enum):
    LIVER_DRIVEN = "liver_driven"
    TUMOR_DRIVEN = "tumor_driven"


@dataclass
class PathwayEmbeddings:
    z_base: np.ndarray
    z_liver: np.ndarray
    z_tumor: np.ndarray

    def validate(self) -> "PathwayEmbeddings":
        if not (self.z_base.shape == self.z_liver.shape == self.z_tumor.shape):
            raise DimensionError("pathway embeddings must share one dimensionality")
        return self


@dataclass
class GateOutput:
    g: np.ndarray        # [z_base; dz; |dz|]
    w_liver: float
    w_tumor: float


@dataclass
class RiskDecomposition:
    base_risk: float
    e_liver: np.ndarray | None
    e_tumor: np.ndarray | None
    delta_r_liver: float
    delta_r_tumor: float
    alpha: float
    gate: GateOutput | None
    total_risk: float


# variant name -> (include_base, experts, use_gate, use_alpha)
VARIANT_STRUCTURES = {
    "full": (True, ("liver", "tumor"), True, True),
    "base_only": (True, (), False, False),
    "liver_only": (False, ("liver",), False, True),
    "tumor_only": (False, ("tumor",), False, True),
    "liver_base": (True, ("liver",), False, True),
    "tumor_base": (True, ("tumor",), False, True),
    "joint_no_moe": (True, ("liver", "tumor"), False, False),
    "liver_tumor_no_base": (False, ("liver", "tumor"), True, True),
}


def gate_forward(z: PathwayEmbeddings, G: Parameter) -> GateOutput:
    """Softmax routing from [z_base; dz; |dz|]; weights sum to 1."""
    z.validate()
    dz = z.z_liver - z.z_tumor
    g = np.concatenate([z.z_base, dz, np.abs(dz)])
    if G.shape != (2, g.shape[0]):
        raise DimensionError(f"gate weight {G.shape} does not match input {g.shape}")
    w = softmax_lastaxis(g @ G.value.T)
    return GateOutput(g=g, w_liver=float(w[0]), w_tumor=float(w[1]))


def stratify_phenotype(gate: GateOutput) -> Phenotype:
    """Dominant-pathway label; the 0.5 boundary counts as liver-driven."""
    return Phenotype.LIVER_DRIVEN if gate.w_liver >= 0.5 else Phenotype.TUMOR_DRIVEN


class SurvivalHead:
    """Trainable head; structure chosen by variant name."""

    def __init__(self, d_emb: int, rng: np.random.Generator, variant: str = "full",
                 expert_dim: int | None = None, alpha_hidden: int | None = None):
        if variant not in VARIANT_STRUCTURES:
            raise ConfigurationError(
                f"unknown variant '{variant}'; valid: {', '.join(sorted(VARIANT_STRUCTURES))}"
            )
        self.variant = variant
        self.include_base, self.experts, self.use_gate, self.use_alpha = (
            VARIANT_STRUCTURES[variant]
        )
        self.d_emb = d_emb
        self.expert_dim = expert_dim or d_emb // 2
        self.alpha_hidden = alpha_hidden or d_emb // 2
        e = self.expert_dim

        self.params = {}
        if self.include_base:
            self.params["base_W"] = Parameter(rng.normal(0.0, d_emb**-0.5, (1, d_emb)))
            self.params["base_b"] = Parameter(np.zeros((1, 1)))
        for name in self.experts:
            self.params[f"{name}_W1"] = Parameter(rng.normal(0.0, d_emb**-0.5, (e, d_emb)))
            self.params[f"{name}_b1"] = Parameter(np.zeros((1, e)))
            self.params[f"{name}_W2"] = Parameter(rng.normal(0.0, e**-0.5, (e, e)))
            self.params[f"{name}_b2"] = Parameter(np.zeros((1, e)))
            self.params[f"{name}_head_W"] = Parameter(rng.normal(0.0, e**-0.5, (1, e)))
            self.params[f"{name}_head_b"] = Parameter(np.zeros((1, 1)))
        if self.use_gate:
            self.params["gate_G"] = Parameter(rng.normal(0.0, 0.01, (2, 3 * d_emb)))
        if self.use_alpha:
            a_in = d_emb + e * len(self.experts)
            self.params["alpha_W1"] = Parameter(
                rng.normal(0.0, a_in**-0.5, (self.alpha_hidden, a_in)))
            self.params["alpha_b1"] = Parameter(np.zeros((1, self.alpha_hidden)))
            self.params["alpha_W2"] = Parameter(
                rng.normal(0.0, self.alpha_hidden**-0.5, (1, self.alpha_hidden)))
            self.params["alpha_b2"] = Parameter(np.zeros((1, 1)))
        self._tape = None

    def named_parameters(self) -> dict:
        return dict(self.params)

    def parameters(self):
        return list(self.params.values())

    # -- forward / backward over a batch ---------------------------------

    def forward(self, z_base: np.ndarray, z_liver: np.ndarray, z_tumor: np.ndarray):
        """(B, d) x3 -> risks (B,). Caches for one backward call."""
        B = z_base.shape[0]
        p = self.params
        tape = {"B": B}
        risks = np.zeros((B, 1))

        if self.include_base:
            tape["base"] = Linear(p["base_W"], p["base_b"])
            risks = risks + tape["base"].forward(z_base)

        if self.experts:
            zs = {"liver": z_liver, "tumor": z_tumor}
            es = {}
            drs = {}
            for name in self.experts:
                mlp = Mlp([(p[f"{name}_W1"], p[f"{name}_b1"]),
                           (p[f"{name}_W2"], p[f"{name}_b2"])])
                head = Linear(p[f"{name}_head_W"], p[f"{name}_head_b"])
                es[name] = mlp.forward(zs[name])
                drs[name] = head.forward(es[name])
                tape[f"mlp_{name}"] = mlp
                tape[f"head_{name}"] = head
            tape["es"] = es
            tape["drs"] = drs

            if self.use_gate:
                dz = z_liver - z_tumor
                gate_in = np.concatenate([z_base, dz, np.abs(dz)], axis=1)
                gate_lin = Linear(p["gate_G"])
                w = softmax_lastaxis(gate_lin.forward(gate_in))
                tape["gate_lin"] = gate_lin
                tape["w"] = w
                mix = w[:, 0:1] * drs["liver"] + w[:, 1:2] * drs["tumor"]
            else:
                mix = sum(drs[name] for name in self.experts)

            if self.use_alpha:
                a_in = np.concatenate([z_base] + [es[n] for n in self.experts], axis=1)
                alpha_mlp = Mlp([(p["alpha_W1"], p["alpha_b1"]),
                                 (p["alpha_W2"], p["alpha_b2"])])
                sig = Sigmoid()
                alpha = sig.forward(alpha_mlp.forward(a_in))
                tape["alpha_mlp"] = alpha_mlp
                tape["sig"] = sig
                tape["alpha"] = alpha
                tape["mix"] = mix
                risks = risks + alpha * mix
            else:
                risks = risks + mix

        self._tape = tape
        return risks[:, 0]

    def backward(self, g_risks: np.ndarray) -> None:
        """g_risks (B,) from the loss; accumulates into parameter grads."""
        t = self._tape
        g = g_risks.reshape(-1, 1)
        if self.include_base:
            t["base"].backward(g)
        if not self.experts:
            return

        if self.use_alpha:
            alpha, mix = t["alpha"], t["mix"]
            d_alpha = g * mix
            d_mix = g * alpha
            ds = t["sig"].backward(d_alpha)
            d_ain = t["alpha_mlp"].backward(ds)
            d_es_alpha = {}
            off = self.d_emb
            for name in self.experts:
                d_es_alpha[name] = d_ain[:, off:off + self.expert_dim]
                off += self.expert_dim
        else:
            d_mix = g
            d_es_alpha = {name: 0.0 for name in self.experts}

        drs = t["drs"]
        if self.use_gate:
            w = t["w"]
            d_drs = {"liver": d_mix * w[:, 0:1], "tumor": d_mix * w[:, 1:2]}
            dw = np.concatenate([d_mix * drs["liver"], d_mix * drs["tumor"]], axis=1)
            dlogits = w * (dw - (dw * w).sum(axis=1, keepdims=True))
            t["gate_lin"].backward(dlogits)
        else:
            d_drs = {name: d_mix for name in self.experts}

        for name in self.experts:
            d_e = t[f"head_{name}"].backward(d_drs[name]) + d_es_alpha[name]
            t[f"mlp_{name}"].backward(d_e)

    # -- per-patient decomposition ----------------------------------------

    def decompose_batch(self, z_base: np.ndarray, z_liver: np.ndarray,
                        z_tumor: np.ndarray) -> dict:
        """Component arrays for a batch: risk, base, deltas, alpha, gate weights.

        Degenerate variants report their fixed values (gate weight 1 for a
        single expert, alpha 1 when no modulation) so the exported risk table
        always recombines to the forward risk.
        """
        B = z_base.shape[0]
        risks = self.forward(z_base, z_liver, z_tumor)
        t = self._tape
        out = {
            "total_risk": risks,
            "base_risk": (t["base"].forward(z_base)[:, 0] if self.include_base
                          else np.zeros(B)),
            "delta_r_liver": np.zeros(B),
            "delta_r_tumor": np.zeros(B),
            "alpha": (t["alpha"][:, 0] if self.use_alpha else np.ones(B)),
        }
        drs = t.get("drs", {})
        if "liver" in drs:
            out["delta_r_liver"] = drs["liver"][:, 0]
        if "tumor" in drs:
            out["delta_r_tumor"] = drs["tumor"][:, 0]
        if self.use_gate:
            out["w_liver"] = t["w"][:, 0]
            out["w_tumor"] = t["w"][:, 1]
        elif self.experts:
            fixed = 1.0
            out["w_liver"] = np.full(B, fixed if "liver" in self.experts else 0.0)
            out["w_tumor"] = np.full(B, fixed if "tumor" in self.experts else 0.0)
        else:
            out["w_liver"] = np.full(B, np.nan)
            out["w_tumor"] = np.full(B, np.nan)
        return out

    def decompose(self, z: PathwayEmbeddings) -> RiskDecomposition:
        """Full component log for one patient; recombines to the forward risk."""
        z.validate()
        p = self.params
        zb = z.z_base[None, :]
        risk = self.forward(zb, z.z_liver[None, :], z.z_tumor[None, :])
        t = self._tape
        gate = None
        if self.use_gate:
            gate = gate_forward(z, p["gate_G"])
        base = float(t["base"].forward(zb)[0, 0]) if self.include_base else 0.0
        es = t.get("es", {})
        drs = t.get("drs", {})
        return RiskDecomposition(
            base_risk=base,
            e_liver=es["liver"][0] if "liver" in es else None,
            e_tumor=es["tumor"][0] if "tumor" in es else None,
            delta_r_liver=float(drs["liver"][0, 0]) if "liver" in drs else 0.0,
            delta_r_tumor=float(drs["tumor"][0, 0]) if "tumor" in drs else 0.0,
            alpha=float(t["alpha"][0, 0]) if self.use_alpha else 1.0,
            gate=gate,
            total_risk=float(risk[0]),
        )
