"""Kaplan-Meier product-limit estimator and the two-sample log-rank test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from ..errors import InputError, MetricUndefinedError


@dataclass
class KMCurve:
    event_times: np.ndarray     # sorted distinct times with >= 1 event
    survival_probs: np.ndarray  # S(t) just after each event time
    at_risk: np.ndarray
    n_events: np.ndarray

    def survival_at(self, t: float) -> float:
        """Step-function value S(t); 1 before the first event."""
        idx = np.searchsorted(self.event_times, t, side="right") - 1
        return 1.0 if idx < 0 else float(self.survival_probs[idx])


def kaplan_meier(times, events) -> KMCurve:
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    if times.size == 0:
        raise InputError("kaplan_meier needs at least one observation")
    order = np.argsort(times, kind="stable")
    t_s = times[order]
    e_s = events[order]

    uniq = np.unique(t_s[e_s])
    event_counts = np.zeros(uniq.size)
    risk_counts = np.zeros(uniq.size)
    for k, t in enumerate(uniq):
        event_counts[k] = np.sum((t_s == t) & e_s)
        risk_counts[k] = np.sum(t_s >= t)
    probs = np.cumprod(1.0 - event_counts / risk_counts) if uniq.size else np.array([])
    return KMCurve(event_times=uniq, survival_probs=probs,
                   at_risk=risk_counts.astype(int), n_events=event_counts.astype(int))


@dataclass
class LogRankResult:
    chi_square: float
    p_value: float


def log_rank_test(times_a, events_a, times_b, events_b) -> LogRankResult:
    """Two-sample log-rank: observed-minus-expected events in group A against
    the hypergeometric variance, chi-square with 1 df."""
    ta = np.asarray(times_a, dtype=np.float64)
    ea = np.asarray(events_a, dtype=bool)
    tb = np.asarray(times_b, dtype=np.float64)
    eb = np.asarray(events_b, dtype=bool)
    if ta.size == 0 or tb.size == 0:
        raise InputError("both groups must be non-empty")
    if not (ea.any() or eb.any()):
        raise MetricUndefinedError("log-rank undefined: no events in either group")

    all_times = np.concatenate([ta, tb])
    all_events = np.concatenate([ea, eb])
    in_a = np.concatenate([np.ones(ta.size, bool), np.zeros(tb.size, bool)])
    event_times = np.unique(all_times[all_events])

    observed_minus_expected = 0.0
    variance = 0.0
    for t in event_times:
        at_risk = all_times >= t
        n = at_risk.sum()
        n_a = (at_risk & in_a).sum()
        dying = (all_times == t) & all_events
        d = dying.sum()
        d_a = (dying & in_a).sum()
        expected_a = n_a * d / n
        observed_minus_expected += d_a - expected_a
        if n > 1:
            variance += (n_a / n) * (1.0 - n_a / n) * d * (n - d) / (n - 1)
    if variance == 0.0:
        raise MetricUndefinedError("log-rank undefined: zero variance (degenerate groups)")
    stat = observed_minus_expected**2 / variance
    return LogRankResult(chi_square=float(stat), p_value=float(chi2.sf(stat, df=1)))
