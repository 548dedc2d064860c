"""Data model for left-truncated, right-censored competing-risks samples.

Every estimator in the package consumes a :class:`TwoSampleData`, which holds
the validated observations of both groups together with the derived risk-set
structures (distinct event times, at-risk counts and cause-specific event
counts).  All containers are immutable after construction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

GROUPS = (1, 2)
CAUSES = (1, 2)


class DataError(ValueError):
    """Raised when observations violate the data model."""


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Observation:
    """One subject: entry (truncation) time, exit time, status and group.

    ``status`` is 0 for a censored record and the cause (1 or 2) otherwise.
    """

    entry: float
    exit: float
    status: int
    group: int

    def __post_init__(self):
        entry, exit_ = float(self.entry), float(self.exit)
        if not (np.isfinite(entry) and np.isfinite(exit_)):
            raise DataError(f"non-finite time in {self!r}")
        if entry < 0 or exit_ < 0:
            raise DataError(f"negative time in {self!r}")
        if not entry < exit_:
            raise DataError(f"entry must be smaller than exit, got entry={entry} exit={exit_}")
        if self.status not in (0, 1, 2):
            raise DataError(f"invalid status code {self.status!r}")
        if self.group not in GROUPS:
            raise DataError(f"invalid group label {self.group!r}")
        object.__setattr__(self, "entry", entry)
        object.__setattr__(self, "exit", exit_)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function.

    The value is ``initial_value`` before the first jump time and
    ``values_after[i]`` on ``[jump_times[i], jump_times[i+1])``.
    """

    jump_times: np.ndarray
    values_after: np.ndarray
    initial_value: float = 0.0

    def __post_init__(self):
        t = _frozen(self.jump_times)
        v = _frozen(self.values_after)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("jump_times and values_after must be 1-d arrays of equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("jump_times must be strictly increasing")
        object.__setattr__(self, "jump_times", t)
        object.__setattr__(self, "values_after", v)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    @classmethod
    def constant(cls, value: float = 0.0) -> StepFunction:
        return cls(np.empty(0), np.empty(0), value)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t_arr, side="right") - 1
        vals = np.concatenate(([self.initial_value], self.values_after))
        out = vals[idx + 1]
        return out if t_arr.ndim else float(out)

    def left_limit(self, t):
        """Value just before ``t``."""
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t_arr, side="left") - 1
        vals = np.concatenate(([self.initial_value], self.values_after))
        out = vals[idx + 1]
        return out if t_arr.ndim else float(out)

    @property
    def final_value(self) -> float:
        return float(self.values_after[-1]) if self.values_after.size else self.initial_value

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            self.initial_value == other.initial_value
            and np.array_equal(self.jump_times, other.jump_times)
            and np.array_equal(self.values_after, other.values_after)
        )

    __hash__ = None


@dataclass(frozen=True)
class GroupSample:
    """Observations of one group plus its risk-set summary at event times.

    ``times`` are the distinct event times (any cause) of the group, with
    ``at_risk``, ``d1`` and ``d2`` holding Y(s), the cause-1 and the cause-2
    event counts at each of them.
    """

    entry: np.ndarray
    exit: np.ndarray
    status: np.ndarray
    times: np.ndarray = field(init=False)
    at_risk: np.ndarray = field(init=False)
    d1: np.ndarray = field(init=False)
    d2: np.ndarray = field(init=False)

    def __post_init__(self):
        entry = _frozen(self.entry)
        exit_ = _frozen(self.exit)
        status = _frozen(self.status, dtype=np.int64)
        object.__setattr__(self, "entry", entry)
        object.__setattr__(self, "exit", exit_)
        object.__setattr__(self, "status", status)

        ev = status > 0
        times, inv = np.unique(exit_[ev], return_inverse=True)
        d1 = np.bincount(inv, weights=(status[ev] == 1), minlength=times.size)
        d2 = np.bincount(inv, weights=(status[ev] == 2), minlength=times.size)
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "d1", _frozen(d1.astype(np.int64), dtype=np.int64))
        object.__setattr__(self, "d2", _frozen(d2.astype(np.int64), dtype=np.int64))
        object.__setattr__(self, "at_risk", _frozen(self.count_at_risk(times), dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.exit.size)

    @property
    def n_events(self) -> int:
        return int(np.count_nonzero(self.status))

    def count_at_risk(self, t) -> np.ndarray:
        # Y(t) = #{entry < t <= exit}; exit < t already implies entry < t.
        t = np.asarray(t, dtype=float)
        entered = np.searchsorted(np.sort(self.entry), t, side="left")
        left = np.searchsorted(np.sort(self.exit), t, side="left")
        return entered - left


@dataclass(frozen=True)
class TwoSampleData:
    """Validated pair of competing-risks samples."""

    group1: GroupSample
    group2: GroupSample

    def __post_init__(self):
        if self.group1.size == 0 or self.group2.size == 0:
            raise DataError("both groups must be non-empty")

    def group(self, label: int) -> GroupSample:
        if label == 1:
            return self.group1
        if label == 2:
            return self.group2
        raise DataError(f"unknown group {label!r}")

    @property
    def sizes(self) -> tuple[int, int]:
        return self.group1.size, self.group2.size

    @property
    def n(self) -> int:
        return self.group1.size + self.group2.size

    @property
    def n_events(self) -> tuple[int, int]:
        """Observed events (any cause) per group."""
        return self.group1.n_events, self.group2.n_events

    @property
    def event_times(self) -> np.ndarray:
        """Sorted distinct event times of the pooled sample."""
        return np.union1d(self.group1.times, self.group2.times)

    @property
    def ties(self) -> dict[float, int]:
        """Pooled event times observed more than once, with multiplicity."""
        counts = Counter()
        for g in (self.group1, self.group2):
            ev = g.status > 0
            counts.update(g.exit[ev].tolist())
        return {t: m for t, m in sorted(counts.items()) if m > 1}

    def observations(self) -> list[Observation]:
        out = []
        for label, g in ((1, self.group1), (2, self.group2)):
            out.extend(
                Observation(float(a), float(b), int(s), label)
                for a, b, s in zip(g.entry, g.exit, g.status)
            )
        return out

    @classmethod
    def from_arrays(cls, exit, status, group, entry=None) -> TwoSampleData:
        """Build from parallel arrays, validating every record."""
        exit = np.asarray(exit, dtype=float)
        status = np.asarray(status)
        group = np.asarray(group)
        entry = np.zeros_like(exit) if entry is None else np.asarray(entry, dtype=float)
        if not (exit.shape == status.shape == group.shape == entry.shape) or exit.ndim != 1:
            raise DataError("exit, status, group and entry must be 1-d arrays of equal length")
        _check_arrays(entry, exit, status, group)
        status = status.astype(np.int64)
        group = group.astype(np.int64)
        parts = []
        for label in GROUPS:
            m = group == label
            parts.append(GroupSample(entry[m], exit[m], status[m]))
        return cls(*parts)


def _check_arrays(entry, exit, status, group):
    bad = ~(np.isfinite(entry) & np.isfinite(exit))
    if bad.any():
        raise DataError(f"non-finite time in record {int(np.argmax(bad))}")
    bad = (entry < 0) | (exit < 0)
    if bad.any():
        raise DataError(f"negative time in record {int(np.argmax(bad))}")
    bad = ~(entry < exit)
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(f"record {i}: entry must be smaller than exit (entry={entry[i]}, exit={exit[i]})")
    bad = ~np.isin(status, (0, 1, 2))
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(f"record {i}: invalid status code {status[i]!r}")
    bad = ~np.isin(group, GROUPS)
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(f"record {i}: invalid group label {group[i]!r}")
    for label in GROUPS:
        if not np.any(group == label):
            raise DataError(f"group {label} is empty")


def _as_observation(rec) -> Observation:
    if isinstance(rec, Observation):
        return rec
    if isinstance(rec, Mapping):
        return Observation(rec.get("entry", 0.0), rec["exit"], rec["status"], rec["group"])
    rec = tuple(rec)
    if len(rec) == 3:
        exit_, status, group = rec
        return Observation(0.0, exit_, status, group)
    if len(rec) == 4:
        return Observation(*rec)
    raise DataError(f"cannot interpret record {rec!r}")


def validate(observations: Iterable) -> TwoSampleData:
    """Validate raw records and build a :class:`TwoSampleData`.

    Records may be :class:`Observation` instances, ``(entry, exit, status,
    group)`` or ``(exit, status, group)`` tuples, or mappings with those keys.
    """
    obs = [_as_observation(r) for r in observations]
    if not obs:
        raise DataError("no observations")
    return TwoSampleData.from_arrays(
        [o.exit for o in obs],
        [o.status for o in obs],
        [o.group for o in obs],
        entry=[o.entry for o in obs],
    )


def at_risk(data: TwoSampleData, group: int, t) -> np.ndarray | int:
    """Number of subjects of ``group`` at risk just before ``t``."""
    y = data.group(group).count_at_risk(t)
    return int(y) if np.ndim(y) == 0 else y


def counting_process(data: TwoSampleData, group: int, cause: int | None) -> StepFunction:
    """Observed counting process of cause-``cause`` events; ``None`` for all causes."""
    g = data.group(group)
    if cause is None:
        d = g.d1 + g.d2
    elif cause == 1:
        d = g.d1
    elif cause == 2:
        d = g.d2
    else:
        raise DataError(f"unknown cause {cause!r}")
    keep = d > 0
    return StepFunction(g.times[keep], np.cumsum(d[keep]).astype(float), 0.0)
