"""Central finite-difference verification of analytic gradients.

Callers populate param.grad (zero_grad, forward, backward) and then hand
the same deterministic loss closure here. Every coordinate of every
parameter is perturbed by +/-h and the two-sided difference quotient is
compared against the stored analytic gradient. Relative error uses
max(|analytic|, |numeric|, 1e-8) in the denominator so that exact zeros on
both sides compare clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ParamCheck:
    name: str
    max_rel_err: float
    worst_coord: tuple
    analytic: float
    numeric: float


@dataclass
class GradCheckReport:
    tol: float
    h: float
    per_param: list = field(default_factory=list)

    @property
    def max_rel_err(self) -> float:
        return max((c.max_rel_err for c in self.per_param), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol

    def __str__(self) -> str:
        lines = [
            f"gradient check (h={self.h:g}, tol={self.tol:g}): "
            f"{'PASS' if self.passed else 'FAIL'} (max rel err {self.max_rel_err:.3e})"
        ]
        for c in self.per_param:
            lines.append(
                f"  {c.name}: max rel err {c.max_rel_err:.3e} at {c.worst_coord} "
                f"(analytic {c.analytic:+.6e}, numeric {c.numeric:+.6e})"
            )
        return "\n".join(lines)


def finite_difference_check(loss_fn, params, h: float = 1e-5, tol: float = 1e-4,
                            names=None) -> GradCheckReport:
    """Compare stored analytic grads against central differences of loss_fn.

    loss_fn() must be deterministic and depend on the current param values
    only. param.grad is treated as the analytic gradient and is not
    modified; param values are restored exactly after probing.
    """
    report = GradCheckReport(tol=tol, h=h)
    if names is None:
        names = [f"param{i}" for i in range(len(params))]
    for name, p in zip(names, params):
        analytic = p.grad
        worst = (0, 0)
        worst_err = 0.0
        worst_pair = (0.0, 0.0)
        it = np.nditer(p.value, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p.value[idx]
            p.value[idx] = orig + h
            f_plus = loss_fn()
            p.value[idx] = orig - h
            f_minus = loss_fn()
            p.value[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = analytic[idx]
            denom = max(abs(a), abs(numeric), 1e-8)
            err = abs(a - numeric) / denom
            if err > worst_err:
                worst_err = err
                worst = idx
                worst_pair = (a, numeric)
            it.iternext()
        report.per_param.append(
            ParamCheck(name=name, max_rel_err=worst_err, worst_coord=worst,
                       analytic=worst_pair[0], numeric=worst_pair[1])
        )
    return report
