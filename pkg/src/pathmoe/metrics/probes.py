"""Linear probes of frozen embeddings against categorical labels.

One-vs-rest logistic regression fitted by full-batch gradient descent
(AdamW on the weight vector), evaluated by macro-averaged one-vs-rest AUC on
held-out stratified folds. The specialization test probes two embedding
sets with identical fold assignments and compares fold-wise macro AUCs with
a sign-flip permutation test, one-sided in the observed direction (five
folds cannot reach p < 0.05 two-sided).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, InputError
from ..nn.optim import AdamWConfig, adamw_step
from ..nn.params import Parameter, spawn_rng
from .auc import roc_auc


@dataclass
class EvalConfig:
    horizons_months: tuple = (12.0, 18.0, 24.0)
    n_folds: int = 5
    permutations: int = 1000
    seed: int = 0

    def validate(self) -> "EvalConfig":
        if any(h <= 0 for h in self.horizons_months):
            raise ConfigurationError("horizons must be positive")
        if self.n_folds < 2:
            raise ConfigurationError("need at least 2 folds")
        return self


def stratified_folds(labels: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Fold id per sample; every class is dealt round-robin across folds."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise InputError("need at least two classes to probe")
    if counts.min() < n_folds:
        raise ConfigurationError(
            f"class {classes[np.argmin(counts)]} has {counts.min()} members, "
            f"fewer than {n_folds} folds"
        )
    rng = spawn_rng(seed, "folds")
    fold_of = np.empty(labels.size, dtype=int)
    for c in classes:
        idx = np.where(labels == c)[0]
        idx = idx[rng.permutation(idx.size)]
        fold_of[idx] = np.arange(idx.size) % n_folds
    return fold_of


def _fit_logistic(X: np.ndarray, y: np.ndarray, seed: int,
                  steps: int = 200, lr: float = 0.05) -> tuple:
    rng = spawn_rng(seed, "probe-init")
    W = Parameter(rng.normal(0.0, 0.01, (1, X.shape[1])))
    b = Parameter(np.zeros((1, 1)))
    opt = AdamWConfig(learning_rate=lr, weight_decay=1e-4)
    yv = y.astype(np.float64)[:, None]
    for _ in range(steps):
        logits = X @ W.value.T + b.value[0]
        p = 1.0 / (1.0 + np.exp(-logits))
        g = (p - yv) / X.shape[0]
        W.grad = g.T @ X
        b.grad = g.sum(axis=0, keepdims=True)
        adamw_step([W, b], opt)
    return W.value.copy(), b.value.copy()


@dataclass
class ProbeResult:
    macro_auc: float
    fold_aucs: list = field(default_factory=list)


def linear_probe(embeddings: np.ndarray, labels: np.ndarray, cfg: EvalConfig,
                 fold_of: np.ndarray | None = None) -> ProbeResult:
    """Cross-validated one-vs-rest probe; returns mean and per-fold macro AUC."""
    cfg.validate()
    X = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    if X.shape[0] != labels.shape[0]:
        raise InputError(f"{X.shape[0]} embeddings vs {labels.shape[0]} labels")
    if fold_of is None:
        fold_of = stratified_folds(labels, cfg.n_folds, cfg.seed)
    classes = np.unique(labels)

    fold_aucs = []
    for k in range(cfg.n_folds):
        val = fold_of == k
        Xtr, ytr = X[~val], labels[~val]
        Xva, yva = X[val], labels[val]
        class_aucs = []
        for c in classes:
            W, b = _fit_logistic(Xtr, ytr == c, seed=cfg.seed + 7 * k)
            scores = (Xva @ W.T + b[0])[:, 0]
            class_aucs.append(roc_auc(scores, yva == c))
        fold_aucs.append(float(np.mean(class_aucs)))
    return ProbeResult(macro_auc=float(np.mean(fold_aucs)), fold_aucs=fold_aucs)


@dataclass
class SpecializationResult:
    auc_liver: float
    auc_tumor: float
    delta: float
    p_value: float
    fold_deltas: list = field(default_factory=list)


def probe_specialization_test(liver_embs: np.ndarray, tumor_embs: np.ndarray,
                              labels: np.ndarray, cfg: EvalConfig) -> SpecializationResult:
    """Paired comparison of two embedding sets on the same labels and folds."""
    cfg.validate()
    labels = np.asarray(labels)
    fold_of = stratified_folds(labels, cfg.n_folds, cfg.seed)
    res_liver = linear_probe(liver_embs, labels, cfg, fold_of=fold_of)
    res_tumor = linear_probe(tumor_embs, labels, cfg, fold_of=fold_of)
    deltas = np.array(res_liver.fold_aucs) - np.array(res_tumor.fold_aucs)
    observed = float(deltas.mean())

    rng = spawn_rng(cfg.seed, "signflip")
    flips = rng.choice([-1.0, 1.0], size=(cfg.permutations, deltas.size))
    perm_stats = (flips * deltas).mean(axis=1)
    if observed >= 0.0:
        extreme = int(np.sum(perm_stats >= observed))
    else:
        extreme = int(np.sum(perm_stats <= observed))
    p = (1.0 + extreme) / (cfg.permutations + 1.0)
    return SpecializationResult(
        auc_liver=res_liver.macro_auc,
        auc_tumor=res_tumor.macro_auc,
        delta=observed,
        p_value=float(p),
        fold_deltas=deltas.tolist(),
    )
