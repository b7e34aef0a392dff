"""Negative log Cox partial likelihood with Breslow tie handling.

The risk set at an event time t is everyone still under observation at t
(time >= t); tied event times share one risk-set denominator. The loss is
averaged over events and the analytic gradient is returned alongside it.
Both are invariant to adding a constant to all risks and to permuting
patient order (ties are summed in a canonical (time, risk) order).
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, InputError, MetricUndefinedError


def cox_nll(risks: np.ndarray, times: np.ndarray, events: np.ndarray):
    """Returns (loss, grad) with grad the same shape as risks."""
    risks = np.asarray(risks, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    if not (risks.shape == times.shape == events.shape) or risks.ndim != 1:
        raise DimensionError(
            f"risks {risks.shape}, times {times.shape}, events {events.shape} must be equal 1-D"
        )
    if np.any(times <= 0.0):
        raise InputError("survival times must be positive")
    n_events = int(events.sum())
    if n_events == 0:
        raise MetricUndefinedError("partial likelihood undefined with zero events")

    # canonical order makes tied-group sums independent of input permutation
    order = np.lexsort((risks, times))
    t_s = times[order]
    r_s = risks[order]
    e_s = events[order]

    m = r_s.max()
    exp_r = np.exp(r_s - m)

    # risk-set denominators, walking unique times from latest to earliest
    uniq_times, first_idx = np.unique(t_s, return_index=True)
    group_of = np.searchsorted(uniq_times, t_s)
    n_groups = uniq_times.size
    group_exp_sum = np.zeros(n_groups)
    np.add.at(group_exp_sum, group_of, exp_r)
    # denom[g] = sum of exp over groups g..end (times >= uniq_times[g])
    denom = np.cumsum(group_exp_sum[::-1])[::-1]

    log_denom = np.log(denom)  # log S(t) - m
    loss = -float(np.sum(e_s * ((r_s - m) - log_denom[group_of]))) / n_events

    # gradient: -(1/E) [ event_k - exp(r_k) * sum_{event times <= t_k} d_t / S(t) ]
    group_event_count = np.zeros(n_groups)
    np.add.at(group_event_count, group_of, e_s.astype(np.float64))
    ratio = np.where(denom > 0.0, group_event_count / denom, 0.0)
    cum_ratio = np.cumsum(ratio)  # over event times <= current group's time
    grad_sorted = -(e_s.astype(np.float64) - exp_r * cum_ratio[group_of]) / n_events

    grad = np.empty_like(grad_sorted)
    grad[order] = grad_sorted
    return loss, grad
