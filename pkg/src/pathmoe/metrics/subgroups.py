"""Risk-threshold stratification and phenotype x treatment subgroup analysis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, MetricUndefinedError, PathmoeError
from .km import KMCurve, kaplan_meier, log_rank_test

LOW_POWER_ARM_SIZE = 12  # arms at or below this size are flagged


def risk_threshold_stratify(train_risks, train_times, train_events) -> float:
    """Depth-1 stump on the scalar risk: the midpoint threshold whose
    high/low split maximizes the log-rank chi-square. Ties break toward the
    median risk."""
    risks = np.asarray(train_risks, dtype=np.float64)
    times = np.asarray(train_times, dtype=np.float64)
    events = np.asarray(train_events, dtype=bool)
    if int(events.sum()) < 2:
        raise InputError("need at least two events to stratify")
    uniq = np.unique(risks)
    if uniq.size == 1:
        warnings.warn("all risks identical; returning the common value as threshold")
        return float(uniq[0])

    midpoints = 0.5 * (uniq[:-1] + uniq[1:])
    median_risk = float(np.median(risks))
    best = None
    for thr in midpoints:
        high = risks > thr
        low = ~high
        try:
            res = log_rank_test(times[high], events[high], times[low], events[low])
        except (MetricUndefinedError, InputError):
            continue
        key = (res.chi_square, -abs(thr - median_risk), -thr)
        if best is None or key > best[0]:
            best = (key, thr)
    if best is None:
        raise MetricUndefinedError("no threshold yields a testable split")
    return float(best[1])


@dataclass
class SubgroupCell:
    phenotype: str
    risk_group: str
    n_treated: int
    n_untreated: int
    p_value: float | None
    status: str           # "ok", "empty", "undefined"
    low_power: bool
    km_treated: KMCurve | None
    km_untreated: KMCurve | None


def treatment_subgroup_analysis(times, events, treated, phenotypes,
                                risks=None, risk_threshold=None) -> list:
    """Per (phenotype x risk-group) cell: treated-vs-untreated KM curves and
    log-rank p. Cells with an empty arm are reported, not tested; arms of
    size <= 12 are flagged low-power."""
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    treated = np.asarray(treated, dtype=bool)
    phenotypes = np.asarray(phenotypes)

    if risks is not None:
        if risk_threshold is None:
            risk_threshold = risk_threshold_stratify(risks, times, events)
        risk_group = np.where(np.asarray(risks) > risk_threshold, "high", "low")
        risk_levels = ("low", "high")
    else:
        risk_group = np.full(times.size, "all")
        risk_levels = ("all",)

    cells = []
    for ph in sorted(set(phenotypes.tolist())):
        for rg in risk_levels:
            mask = (phenotypes == ph) & (risk_group == rg)
            m_t = mask & treated
            m_u = mask & ~treated
            n_t, n_u = int(m_t.sum()), int(m_u.sum())
            low_power = 0 < min(n_t, n_u) <= LOW_POWER_ARM_SIZE
            if n_t == 0 or n_u == 0:
                cells.append(SubgroupCell(ph, rg, n_t, n_u, None, "empty",
                                          low_power, None, None))
                continue
            km_t = kaplan_meier(times[m_t], events[m_t])
            km_u = kaplan_meier(times[m_u], events[m_u])
            try:
                res = log_rank_test(times[m_t], events[m_t], times[m_u], events[m_u])
                cells.append(SubgroupCell(ph, rg, n_t, n_u, res.p_value, "ok",
                                          low_power, km_t, km_u))
            except PathmoeError:
                cells.append(SubgroupCell(ph, rg, n_t, n_u, None, "undefined",
                                          low_power, km_t, km_u))
    return cells
