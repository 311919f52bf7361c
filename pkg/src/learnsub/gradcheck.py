import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import tape
from .optim import LossFn, grad
from .params import ParamVector

logger = logging.getLogger(__name__)

DENOM_FLOOR = 1e-3


@dataclass
class GradCheckReport:
    max_rel_err: float = 0.0
    worst_coord: Optional[int] = None
    checked: int = 0
    kink_coords: List[int] = field(default_factory=list)
    kink_max_rel_err: float = 0.0

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_rel_err < tol


def _evaluate(loss_fn: LossFn, p: ParamVector):
    loss = loss_fn(p.bind())
    return loss.item(), tape.kink_pattern(loss)


def finite_diff_check(loss_fn: LossFn, p: ParamVector, h: float = 1e-4,
                      coords: Optional[Sequence[int]] = None) -> GradCheckReport:
    """Central differences against ``grad``; coordinates whose ±h steps flip a relu or clamp are kept apart"""
    _, analytic = grad(loss_fn, p)
    _, base_pattern = _evaluate(loss_fn, p)
    report = GradCheckReport()
    indices = range(p.size) if coords is None else coords
    for k in indices:
        plus = p.values.copy()
        minus = p.values.copy()
        plus[k] += h
        minus[k] -= h
        f_plus, pat_plus = _evaluate(loss_fn, p.with_values(plus))
        f_minus, pat_minus = _evaluate(loss_fn, p.with_values(minus))
        numeric = (f_plus - f_minus) / (2.0 * h)
        a = analytic.values[k]
        err = abs(a - numeric) / max(abs(a), abs(numeric), DENOM_FLOOR)
        straddles = not (np.array_equal(pat_plus, base_pattern) and np.array_equal(pat_minus, base_pattern))
        if straddles:
            report.kink_coords.append(int(k))
            report.kink_max_rel_err = max(report.kink_max_rel_err, err)
            continue
        report.checked += 1
        if err > report.max_rel_err:
            report.max_rel_err = float(err)
            report.worst_coord = int(k)
    logger.debug(
        f"Gradient check: {report.checked} coordinates, max rel err {report.max_rel_err:.3e}, "
        f"{len(report.kink_coords)} near kinks"
    )
    return report
