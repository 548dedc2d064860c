"""Two-sample functionals of a pair of cumulative incidence estimates.

The estimates are step functions, so every integral over the window is an
exact finite sum over the pooled jump partition ``t1 = s_0 < s_1 < ... < s_k
<= t2``; each grid value holds on ``[s_i, s_{i+1})`` with ``s_{k+1} = t2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import StepFunction, TwoSampleData

KINDS = ("abc", "ks", "cvm", "pepe", "zabc")


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    t1: float
    t2: float

    def __post_init__(self):
        t1, t2 = float(self.t1), float(self.t2)
        if not (np.isfinite(t1) and np.isfinite(t2)) or not 0 <= t1 < t2:
            raise WindowError(f"window needs 0 <= t1 < t2, got [{self.t1}, {self.t2}]")
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)

    @classmethod
    def parse(cls, text: str) -> Window:
        try:
            a, b = text.split(":")
            return cls(float(a), float(b))
        except ValueError as exc:
            raise WindowError(f"cannot parse window {text!r}; expected t1:t2") from exc

    def __str__(self):
        return f"[{self.t1:g}, {self.t2:g}]"


@dataclass(frozen=True)
class StatisticValue:
    kind: str
    value: float
    window: Window | None
    n1: int | None = None
    n2: int | None = None


def check_window(data: TwoSampleData, window: Window) -> bool:
    """Warn if a group has no subject at risk at ``t2``; returns True when fine."""
    for label in (1, 2):
        g = data.group(label)
        if g.count_at_risk(window.t2) == 0:
            warnings.warn(
                f"risk set of group {label} is exhausted before t2={window.t2:g} "
                f"(last exit {g.exit.max():g})",
                stacklevel=2,
            )
            return False
    return True


def window_grid(window: Window, *jump_sets) -> tuple[np.ndarray, np.ndarray]:
    """Grid points ``s_0..s_k`` and the widths ``s_{i+1} - s_i`` (last to t2)."""
    if jump_sets:
        jumps = np.unique(np.concatenate([np.asarray(j, dtype=float) for j in jump_sets]))
    else:
        jumps = np.empty(0)
    inside = jumps[(jumps > window.t1) & (jumps <= window.t2)]
    points = np.concatenate(([window.t1], inside))
    widths = np.diff(np.append(points, window.t2))
    return points, widths


def _difference(f1: StepFunction, f2: StepFunction, window: Window):
    points, widths = window_grid(window, f1.jump_times, f2.jump_times)
    return f1(points) - f2(points), widths


def _sizes(n, sizes):
    n1, n2 = sizes if sizes is not None else (None, None)
    if n is None:
        if sizes is None:
            raise ValueError("need n or sizes")
        n = n1 + n2
    return float(n), n1, n2


def abc_statistic(f1: StepFunction, f2: StepFunction, window: Window, n=None, sizes=None) -> StatisticValue:
    """Scaled area between the curves, sqrt(n) * int |f1 - f2| dt."""
    n, n1, n2 = _sizes(n, sizes)
    diff, widths = _difference(f1, f2, window)
    return StatisticValue("abc", float(np.sqrt(n) * np.sum(np.abs(diff) * widths)), window, n1, n2)


def ks_statistic(f1: StepFunction, f2: StepFunction, window: Window, n=None, sizes=None) -> StatisticValue:
    n, n1, n2 = _sizes(n, sizes)
    diff, _ = _difference(f1, f2, window)
    return StatisticValue("ks", float(np.sqrt(n) * np.max(np.abs(diff))), window, n1, n2)


def cvm_statistic(f1: StepFunction, f2: StepFunction, window: Window, n=None, sizes=None) -> StatisticValue:
    n, n1, n2 = _sizes(n, sizes)
    diff, widths = _difference(f1, f2, window)
    return StatisticValue("cvm", float(n * np.sum(diff * diff * widths)), window, n1, n2)


def pepe_statistic(f1: StepFunction, f2: StepFunction, window: Window, n=None, sizes=None) -> StatisticValue:
    """Signed integrated difference sqrt(n) * int (f1 - f2) dt."""
    n, n1, n2 = _sizes(n, sizes)
    diff, widths = _difference(f1, f2, window)
    return StatisticValue("pepe", float(np.sqrt(n) * np.sum(diff * widths)), window, n1, n2)


STATISTICS = {
    "abc": abc_statistic,
    "ks": ks_statistic,
    "cvm": cvm_statistic,
    "pepe": pepe_statistic,
}


def _spread(replicates) -> tuple[float, float]:
    r = np.asarray(replicates, dtype=float)
    if r.size < 2:
        raise ValueError("need at least 2 bootstrap replicates")
    sd = float(np.std(r, ddof=1))
    if not sd > 0:
        raise ValueError("bootstrap replicates have zero variance")
    return float(np.mean(r)), sd


def zabc_statistic(t_abc, replicates) -> StatisticValue:
    """Standardized area statistic (T - mean) / sd over bootstrap replicates.

    The moments are the empirical mean and standard deviation (ddof=1) of the
    wild bootstrap replicates of the area statistic.
    """
    base = t_abc if isinstance(t_abc, StatisticValue) else StatisticValue("abc", float(t_abc), None)
    mean, sd = _spread(replicates)
    return StatisticValue("zabc", (base.value - mean) / sd, base.window, base.n1, base.n2)


def studentized_pepe(raw, replicates) -> StatisticValue:
    """Integrated difference divided by the bootstrap standard deviation."""
    base = raw if isinstance(raw, StatisticValue) else StatisticValue("pepe", float(raw), None)
    _, sd = _spread(replicates)
    return StatisticValue("pepe", base.value / sd, base.window, base.n1, base.n2)
