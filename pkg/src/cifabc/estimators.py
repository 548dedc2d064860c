"""Nonparametric estimators on a single group of a :class:`TwoSampleData`.

All estimators are step functions with jumps only at observed event times and
are extended as constants beyond the last exit time of the group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataError, GroupSample, StepFunction, TwoSampleData


@dataclass(frozen=True)
class EstimatorOutput:
    estimate: StepFunction
    group: int
    cause: int | None
    support_end: float

    def __call__(self, t):
        return self.estimate(t)


def _group(data: TwoSampleData, group: int) -> GroupSample:
    g = data.group(group)
    if g.size == 0:
        raise DataError(f"group {group} is empty")
    return g


def _cause_counts(g: GroupSample, cause):
    if cause is None:
        return g.d1 + g.d2
    if cause == 1:
        return g.d1
    if cause == 2:
        return g.d2
    raise DataError(f"unknown cause {cause!r}")


def km_factors(g: GroupSample) -> tuple[np.ndarray, np.ndarray]:
    """Kaplan-Meier values at and just before each event time of ``g``."""
    y = g.at_risk.astype(float)
    surv = np.cumprod(1.0 - (g.d1 + g.d2) / y)
    before = np.concatenate(([1.0], surv[:-1]))
    return surv, before


def cif_values(g: GroupSample) -> tuple[np.ndarray, np.ndarray]:
    """Aalen-Johansen values of both causes at every event time of ``g``."""
    y = g.at_risk.astype(float)
    _, before = km_factors(g)
    f1 = np.cumsum(before * g.d1 / y)
    f2 = np.cumsum(before * g.d2 / y)
    return f1, f2


def kaplan_meier(data: TwoSampleData, group: int) -> EstimatorOutput:
    """Product-limit estimate of the all-cause survival function."""
    g = _group(data, group)
    surv, _ = km_factors(g)
    return EstimatorOutput(StepFunction(g.times, surv, 1.0), group, None, float(g.exit.max()))


def nelson_aalen(data: TwoSampleData, group: int, cause: int | None = None) -> EstimatorOutput:
    """Cause-specific (``cause`` in {1, 2}) or all-cause (``None``) cumulative hazard."""
    g = _group(data, group)
    d = _cause_counts(g, cause)
    keep = d > 0
    inc = d[keep] / g.at_risk[keep].astype(float)
    return EstimatorOutput(
        StepFunction(g.times[keep], np.cumsum(inc), 0.0), group, cause, float(g.exit.max())
    )


def aalen_johansen(data: TwoSampleData, group: int, cause: int = 1) -> EstimatorOutput:
    """Cumulative incidence of ``cause`` in ``group``.

    Sums K(s-) * dN_k(s) / Y(s) over cause-k event times, where K(s-) is the
    Kaplan-Meier estimate just before s.  Tied events of both causes at one
    time share the same K(s-) and Y(s).
    """
    if cause not in (1, 2):
        raise DataError(f"unknown cause {cause!r}")
    g = _group(data, group)
    f1, f2 = cif_values(g)
    d, f = (g.d1, f1) if cause == 1 else (g.d2, f2)
    keep = d > 0
    return EstimatorOutput(StepFunction(g.times[keep], f[keep], 0.0), group, cause, float(g.exit.max()))
