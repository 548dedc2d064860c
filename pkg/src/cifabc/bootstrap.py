"""Wild bootstrap for two-sample comparisons of cumulative incidence functions.

Each bootstrap replicate perturbs the observed event increments of both groups
with i.i.d. mean-zero, unit-variance multipliers and evaluates the resulting
processes on the pooled event-time grid of the window.  Replicate ``b`` draws
its multipliers from its own counter-based stream (Philox keyed by the master
seed, counter offset ``b``), so results do not depend on chunking or on how
many replicates are requested after it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

import numpy as np

from . import kernels
from .core import DataError, GroupSample, StepFunction, TwoSampleData
from .estimators import aalen_johansen, cif_values
from .statistics import (
    STATISTICS,
    StatisticValue,
    Window,
    check_window,
    studentized_pepe,
    window_grid,
    zabc_statistic,
)

FAMILIES = ("normal", "poisson", "rademacher")
_ALIASES = {
    "normal": "normal",
    "standard-normal": "normal",
    "n": "normal",
    "poisson": "poisson",
    "centered-unit-poisson": "poisson",
    "po": "poisson",
    "rademacher": "rademacher",
    "r": "rademacher",
}
# Functional columns returned by the replicate kernel.
COLUMNS = {"abc": 0, "ks": 1, "cvm": 2, "pepe": 3}
CHUNK = 1024
P_VALUE_NOTE = "p = (1 + #{replicates >= T}) / (B + 1)"


class SingularFactorError(DataError):
    """An event in the window exhausts the risk set (all-cause hazard jump of 1)."""

    def __init__(self, group, time):
        super().__init__(
            f"group {group}: risk set exhausted by events at t={time:g}; "
            "the adjusted process is undefined there, shrink the window"
        )
        self.group = group
        self.time = time


@dataclass(frozen=True)
class MultiplierSpec:
    family: str = "poisson"
    corrected: bool = False

    def __post_init__(self):
        key = str(self.family).lower()
        if key not in _ALIASES:
            raise ValueError(f"unknown multiplier family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", _ALIASES[key])
        object.__setattr__(self, "corrected", bool(self.corrected))

    def scale(self, n1: int, n2: int) -> float:
        """Multiplier inflation 1 + (n1 + n2) / (n1 * n2) when corrected, else 1."""
        return 1.0 + (n1 + n2) / (n1 * n2) if self.corrected else 1.0

    @property
    def label(self) -> str:
        short = {"normal": "N", "poisson": "Po", "rademacher": "R"}[self.family]
        return ("c" if self.corrected else "") + short


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for bootstrap replicate ``index`` under master ``seed``."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


def _raw_draws(family: str, count, rng: np.random.Generator) -> np.ndarray:
    if family == "normal":
        return rng.standard_normal(count)
    if family == "poisson":
        return rng.poisson(1.0, count) - 1.0
    return np.where(rng.random(count) < 0.5, -1.0, 1.0)


def draw_multipliers(spec: MultiplierSpec, count, rng: np.random.Generator, sizes=None) -> np.ndarray:
    """I.i.d. multipliers of ``spec.family``, inflated by the correction if requested.

    ``sizes=(n1, n2)`` is required for corrected specs.
    """
    w = _raw_draws(spec.family, count, rng)
    if spec.corrected:
        if sizes is None:
            raise ValueError("corrected multipliers need the group sizes")
        w = w * spec.scale(*sizes)
    return w


# -- per-group process coefficients ---------------------------------------------


@dataclass(frozen=True)
class _Events:
    """Observed events of one group in time order, with estimator values."""

    times: np.ndarray
    cause: np.ndarray
    at_risk: np.ndarray
    f1: np.ndarray  # cause-1 CIF at the event time
    s2: np.ndarray  # 1 - cause-2 CIF at the event time
    dA: np.ndarray  # all-cause Nelson-Aalen jump
    dA1: np.ndarray
    dA2: np.ndarray
    cif_times: np.ndarray = field(repr=False)
    cif1: np.ndarray = field(repr=False)

    def cif1_at(self, t):
        idx = np.searchsorted(self.cif_times, t, side="right") - 1
        return np.where(idx >= 0, self.cif1[np.maximum(idx, 0)], 0.0)


def _events(g: GroupSample) -> _Events:
    ev = np.flatnonzero(g.status > 0)
    order = ev[np.argsort(g.exit[ev], kind="stable")]
    u = g.exit[order]
    pos = np.searchsorted(g.times, u)
    f1, f2 = cif_values(g)
    y = g.at_risk[pos].astype(float)
    d1 = g.d1[pos].astype(float)
    d2 = g.d2[pos].astype(float)
    return _Events(
        times=u,
        cause=g.status[order],
        at_risk=y,
        f1=f1[pos],
        s2=1.0 - f2[pos],
        dA=(d1 + d2) / y,
        dA1=d1 / y,
        dA2=d2 / y,
        cif_times=g.times,
        cif1=f1,
    )


def _standard_coefficients(e: _Events, n: int):
    # V(t) = sum_{u_i <= t} w_i * a_i - F1(t) * sum_{u_i <= t} w_i * b_i
    root = math.sqrt(n)
    a = root * np.where(e.cause == 1, e.s2, e.f1) / e.at_risk
    b = root / e.at_risk
    return a, b


def _adjusted_coefficients(e: _Events, n: int, group: int, until: float):
    """Coefficients of the two multipliers each event uses in the adjusted process.

    Returns ``(ax, ay, bx, by)``: the process increment of event i is
    ``ax*x + ay*y`` and its F1(t)-weighted part ``bx*x + by*y``, where
    ``(x, y) = (G11, G21)`` for cause-1 events and ``(G22, G12)`` for
    cause-2 events.
    """
    remaining = 1.0 - e.dA
    bad = (remaining <= 0) & (e.times <= until)
    if bad.any():
        raise SingularFactorError(group, float(e.times[np.argmax(bad)]))
    remaining = np.where(remaining > 0, remaining, np.inf)
    own = math.sqrt(n) * np.sqrt(np.maximum(1.0 - e.dA, 0.0)) / e.at_risk
    cross_hazard = np.where(e.cause == 1, e.dA2, e.dA1)
    cross = -math.sqrt(n / 2.0) * np.sqrt(cross_hazard) / e.at_risk
    lead = np.where(e.cause == 1, e.s2, e.f1)
    bx = own / remaining
    by = cross / remaining
    # A cause-1 event feeds W1 through G11 (weight S2) and W2 through G21
    # (weight F1); a cause-2 event feeds only W2 (weight F1).
    ax = lead * bx
    ay = e.f1 * by
    return ax, ay, bx, by


def _adjusted_pairs(G: np.ndarray, cause: np.ndarray):
    """Select (x, y) per event from rows of (G11, G12, G21, G22)."""
    c1 = cause == 1
    x = np.where(c1, G[..., 0], G[..., 3])
    y = np.where(c1, G[..., 2], G[..., 1])
    return x, y


def _as_step(e: _Events, inc_a: np.ndarray, inc_b: np.ndarray, until=None) -> StepFunction:
    keep = slice(None) if until is None else e.times <= until
    times = e.times[keep]
    ca = np.cumsum(inc_a[keep])
    cb = np.cumsum(inc_b[keep])
    if times.size == 0:
        return StepFunction.constant(0.0)
    # last event at each distinct time carries the cumulative sums
    last = np.append(times[1:] != times[:-1], True)
    t = times[last]
    return StepFunction(t, ca[last] - e.cif1_at(t) * cb[last], 0.0)


def wb_process(data: TwoSampleData, group: int, multipliers, n: int | None = None) -> StepFunction:
    """One realization of the wild bootstrap process of ``group``.

    ``multipliers`` holds one value per observed event of the group, ordered
    by event time (ties in input order).  ``n`` defaults to the pooled sample
    size.
    """
    e = _events(data.group(group))
    w = np.asarray(multipliers, dtype=float)
    if w.shape != e.times.shape:
        raise ValueError(f"group {group} has {e.times.size} events but {w.size} multipliers were given")
    a, b = _standard_coefficients(e, data.n if n is None else n)
    return _as_step(e, w * a, w * b)


def wb_adjusted_process(
    data: TwoSampleData, group: int, multipliers, n: int | None = None, until: float | None = None
) -> StepFunction:
    """Discontinuity-adjusted wild bootstrap process of ``group``.

    ``multipliers`` has shape ``(events, 4)`` with columns ``G11, G12, G21,
    G22`` per event, events ordered as in :func:`wb_process`.  The process is
    computed on events up to ``until`` (all events when ``None``); any event in
    that range whose all-cause hazard jump equals 1 raises
    :class:`SingularFactorError`.
    """
    e = _events(data.group(group))
    G = np.asarray(multipliers, dtype=float)
    if G.shape != (e.times.size, 4):
        raise ValueError(f"group {group} needs a ({e.times.size}, 4) multiplier matrix, got {G.shape}")
    horizon = np.inf if until is None else until
    ax, ay, bx, by = _adjusted_coefficients(e, data.n if n is None else n, group, horizon)
    x, y = _adjusted_pairs(G, e.cause)
    return _as_step(e, ax * x + ay * y, bx * x + by * y, until)


def wb_statistic(v1: StepFunction, v2: StepFunction, kind: str, window: Window) -> float:
    """Functional of ``v1 - v2`` on the window matching statistic ``kind``."""
    points, widths = window_grid(window, v1.jump_times, v2.jump_times)
    d = v1(points) - v2(points)
    if kind == "abc":
        return float(np.sum(np.abs(d) * widths))
    if kind == "ks":
        return float(np.max(np.abs(d)))
    if kind == "cvm":
        return float(np.sum(d * d * widths))
    if kind == "pepe":
        return float(np.sum(d * widths))
    raise ValueError(f"unknown statistic kind {kind!r}")


# -- replicate engine --------------------------------------------------------------


@dataclass
class _GroupPlan:
    adjusted: bool
    coef: tuple  # (a, b) standard or (ax, ay, bx, by) adjusted, truncated to the window
    cause: np.ndarray
    n_events: int  # all events of the group, including those after t2
    idx: np.ndarray
    f1: np.ndarray

    @property
    def draws_needed(self) -> int:
        return self.n_events * (4 if self.adjusted else 1)

    def increments(self, raw: np.ndarray):
        m = self.coef[0].size
        if not self.adjusted:
            w = raw[:, :m]
            a, b = self.coef
            return w * a, w * b
        G = raw.reshape(raw.shape[0], self.n_events, 4)[:, :m]
        x, y = _adjusted_pairs(G, self.cause)
        ax, ay, bx, by = self.coef
        return ax * x + ay * y, bx * x + by * y


def _plan(data: TwoSampleData, window: Window, adjusted: bool):
    points, widths = window_grid(window, data.event_times)
    plans = []
    for label in (1, 2):
        e = _events(data.group(label))
        m = int(np.searchsorted(e.times, window.t2, side="right"))
        if adjusted:
            coef = tuple(c[:m] for c in _adjusted_coefficients(e, data.n, label, window.t2))
        else:
            coef = tuple(c[:m] for c in _standard_coefficients(e, data.n))
        idx = np.searchsorted(e.times[:m], points, side="right").astype(np.intp)
        plans.append(_GroupPlan(adjusted, coef, e.cause[:m], e.times.size, idx, e.cif1_at(points)))
    return plans, np.ascontiguousarray(widths)


def bootstrap_replicates(
    data: TwoSampleData,
    window: Window,
    spec: MultiplierSpec,
    B: int,
    seed: int,
    adjusted: bool = False,
    start: int = 0,
) -> np.ndarray:
    """Replicates ``start .. start+B-1`` of all functionals, shape ``(B, 4)``.

    Columns follow :data:`COLUMNS` (ABC, KS, CvM, integrated difference).
    """
    plans, widths = _plan(data, window, adjusted)
    p1, p2 = plans
    scale = spec.scale(*data.sizes)
    split = p1.draws_needed
    total = split + p2.draws_needed
    out = np.empty((B, 4))
    for lo in range(0, B, CHUNK):
        hi = min(B, lo + CHUNK)
        raw = np.empty((hi - lo, total))
        for r in range(lo, hi):
            raw[r - lo] = _raw_draws(spec.family, total, replicate_rng(seed, start + r))
        if scale != 1.0:
            raw *= scale
        P1, Q1 = p1.increments(raw[:, :split])
        P2, Q2 = p2.increments(raw[:, split:])
        out[lo:hi] = kernels.replicate_functionals(
            np.ascontiguousarray(P1), np.ascontiguousarray(Q1), p1.idx, p1.f1,
            np.ascontiguousarray(P2), np.ascontiguousarray(Q2), p2.idx, p2.f1,
            widths,
        )
    return out


# -- test procedure ----------------------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-sample test.

    ``statistic`` is the decision statistic: the bootstrap kinds reject when
    it exceeds ``critical_value``; for ``pepe`` the studentized value is
    compared two-sided, i.e. ``|statistic| > critical_value``.  ``raw`` holds
    the unstandardized statistic.
    """

    __test__ = False

    kind: str
    statistic: StatisticValue
    raw: StatisticValue
    p_value: float
    critical_value: float
    reject: bool
    alpha: float
    B: int
    seed: int
    multiplier: MultiplierSpec
    adjusted: bool
    replicate_summary: dict
    notes: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["multiplier"] = {"family": self.multiplier.family, "corrected": self.multiplier.corrected}
        for key in ("statistic", "raw"):
            w = d[key]["window"]
            d[key]["window"] = None if w is None else [w["t1"], w["t2"]]
        d["notes"] = list(self.notes)
        return d


def empirical_quantile(values, alpha: float) -> float:
    """(1 - alpha) quantile as the order statistic ceil((1 - alpha) * B)."""
    v = np.sort(np.asarray(values, dtype=float))
    k = math.ceil((1.0 - alpha) * v.size - 1e-9)
    return float(v[min(max(k, 1), v.size) - 1])


def _summary(rep: np.ndarray, quantile: float) -> dict:
    return {
        "mean": float(np.mean(rep)),
        "sd": float(np.std(rep, ddof=1)) if rep.size > 1 else 0.0,
        "min": float(np.min(rep)),
        "max": float(np.max(rep)),
        "quantile": quantile,
    }


def decide(kind: str, raw: StatisticValue, replicates: np.ndarray, alpha: float):
    """Decision statistic, critical value, p-value and rejection for ``kind``.

    ``replicates`` are the bootstrap replicates of the raw functional (ABC
    replicates for ``zabc``).
    """
    rep = np.asarray(replicates, dtype=float)
    normal = NormalDist()
    if kind == "zabc":
        z = zabc_statistic(raw, rep)
        crit = normal.inv_cdf(1.0 - alpha)
        return z, crit, 1.0 - normal.cdf(z.value), z.value > crit
    if kind == "pepe":
        z = studentized_pepe(raw, rep)
        crit = normal.inv_cdf(1.0 - alpha / 2.0)
        return z, crit, 2.0 * (1.0 - normal.cdf(abs(z.value))), abs(z.value) > crit
    crit = empirical_quantile(rep, alpha)
    p = (1.0 + np.count_nonzero(rep >= raw.value)) / (rep.size + 1.0)
    return raw, crit, float(p), raw.value > crit


def observed_statistic(data: TwoSampleData, window: Window, kind: str) -> StatisticValue:
    f1 = aalen_johansen(data, 1, 1).estimate
    f2 = aalen_johansen(data, 2, 1).estimate
    base = "abc" if kind == "zabc" else kind
    return STATISTICS[base](f1, f2, window, sizes=data.sizes)


def run_test(
    data: TwoSampleData,
    window: Window,
    kind: str = "abc",
    multiplier: MultiplierSpec | None = None,
    B: int = 1000,
    alpha: float = 0.05,
    seed: int = 0,
    adjusted: bool = False,
) -> TestResult:
    """Two-sample test of equal cause-1 cumulative incidence on ``window``."""
    kind = kind.lower()
    if kind not in ("abc", "ks", "cvm", "pepe", "zabc"):
        raise ValueError(f"unknown statistic kind {kind!r}")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if B < 1:
        raise ValueError("B must be at least 1")
    if kind in ("zabc", "pepe") and B < 2:
        raise ValueError(f"{kind} needs at least 2 bootstrap replicates")
    multiplier = multiplier or MultiplierSpec()
    check_window(data, window)
    if not adjusted and data.ties:
        warnings.warn(
            f"{len(data.ties)} tied event time(s); the unadjusted bootstrap assumes "
            "continuous event times (use adjusted=True or jitter the data)",
            stacklevel=2,
        )
    raw = observed_statistic(data, window, kind)
    reps = bootstrap_replicates(data, window, multiplier, B, seed, adjusted)
    column = reps[:, COLUMNS["abc" if kind == "zabc" else kind]]
    stat, crit, p, reject = decide(kind, raw, column, alpha)
    notes = [P_VALUE_NOTE] if kind in ("abc", "ks", "cvm") else []
    if kind == "zabc":
        notes.append("moments reconstructed from wild bootstrap replicates")
    if kind == "pepe":
        notes.append("studentized by the wild bootstrap standard deviation; two-sided")
    return TestResult(
        kind=kind,
        statistic=stat,
        raw=raw,
        p_value=float(p),
        critical_value=float(crit),
        reject=bool(reject),
        alpha=alpha,
        B=B,
        seed=seed,
        multiplier=multiplier,
        adjusted=adjusted,
        replicate_summary=_summary(column, empirical_quantile(column, alpha)),
        notes=tuple(notes),
    )
