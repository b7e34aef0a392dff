"""Fixed-horizon discrimination metrics for survival risks.

time_dependent_auc is the cumulative/dynamic AUC: cases experienced their
event by the horizon, controls are still event-free past it, and censoring
is corrected by inverse-probability-of-censoring weights from the reverse
Kaplan-Meier estimate (events and censorings swap roles). Case weights are
truncated at their 99th percentile to bound variance. With no censoring the
weights are all 1 and the estimate reduces exactly to the pairwise
case-control concordance.
"""

from __future__ import annotations

import numpy as np

from ..errors import InputError, MetricUndefinedError
from .km import kaplan_meier


def censoring_survival(times, events):
    """Reverse KM: survival function of the censoring distribution."""
    return kaplan_meier(times, ~np.asarray(events, dtype=bool))


def time_dependent_auc(risks, times, events, horizon: float) -> float:
    risks = np.asarray(risks, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    if horizon <= 0.0 or horizon > times.max():
        raise MetricUndefinedError(
            f"horizon {horizon} outside observed follow-up (max {times.max():.3g})"
        )
    cases = (times <= horizon) & events
    controls = times > horizon
    if not cases.any():
        raise MetricUndefinedError(f"no events by horizon {horizon}; AUC undefined")
    if not controls.any():
        raise MetricUndefinedError(f"no subjects past horizon {horizon}; AUC undefined")

    g_hat = censoring_survival(times, events)
    case_times = times[cases]
    # weight 1/G(t-) just before each case's event; controls share 1/G(horizon)
    w_case = np.array([1.0 / max(g_hat.survival_at(np.nextafter(t, -np.inf)), 1e-12)
                       for t in case_times])
    cap = np.percentile(w_case, 99)
    w_case = np.minimum(w_case, cap)
    w_ctrl = np.full(int(controls.sum()), 1.0 / max(g_hat.survival_at(horizon), 1e-12))

    r_case = risks[cases]
    r_ctrl = risks[controls]
    greater = (r_case[:, None] > r_ctrl[None, :]).astype(np.float64)
    ties = (r_case[:, None] == r_ctrl[None, :]).astype(np.float64)
    num = w_case @ (greater + 0.5 * ties) @ w_ctrl
    den = w_case.sum() * w_ctrl.sum()
    return float(num / den)


def roc_auc(scores, labels) -> float:
    """Plain binary ranking AUC with tie credit 1/2 (midrank formula)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefinedError("AUC undefined with a single class")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    # midranks over tied score groups
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = ranks[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def concordance_index(risks, times, events) -> float:
    """Harrell's C over usable pairs (earlier event vs longer survivor)."""
    risks = np.asarray(risks, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    num = 0.0
    den = 0.0
    for i in np.where(events)[0]:
        later = times > times[i]
        den += later.sum()
        num += (risks[i] > risks[later]).sum() + 0.5 * (risks[i] == risks[later]).sum()
    if den == 0:
        raise MetricUndefinedError("no comparable pairs for concordance")
    return float(num / den)
