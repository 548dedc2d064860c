"""Monte Carlo laboratory for the operating characteristics of the tests.

Two data-generating models are available.  Model 1 is given by cause-specific
hazards ``exp(-t)`` and ``1 - exp(-t)`` in group 1 and constants ``c`` and
``2 - c`` in group 2 (equal cause-1 incidence iff ``c = 1``).  Model 2 has
cumulative incidences ``p * W(t)`` and ``(1 - p) * W(t)`` with
``W(t) = 1 - exp(-beta * t**a)`` per group.

Event times are drawn from the all-cause distribution and the cause is then
assigned with probability ``alpha_1(T) / alpha(T)``; both models have a
closed-form all-cause inverse, so no numerical integration is needed.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bootstrap import COLUMNS, MultiplierSpec, bootstrap_replicates, decide, observed_statistic
from .core import Observation, TwoSampleData
from .statistics import Window

# Model-2 parameters.  beta = scale**(-a) with scale 1.2 (null, and group 1
# of the alternative) and scale 1.5 (group 2 of the alternative).
MODEL2_H0 = {"beta1": 1.2**-3, "a1": 3.0, "beta2": 1.2**-3, "a2": 3.0, "p": 0.6}
MODEL2_H1 = {"beta1": 1.2**-3.8, "a1": 3.8, "beta2": 1.5**-1.5, "a2": 1.5, "p": 0.6}
MODEL1_C = {"H0": 1.0, "H1": 0.65}

# (exponential rate for group 1, uniform bound for group 2)
CENSORING_SETUPS = (
    (0.0, 0.0),
    (1 / 3, 1.6),
    (2 / 3, 1.6),
    (1.0, 1.6),
    (1 / 3, 2.5),
    (2 / 3, 2.5),
    (1.0, 2.5),
)

KINDS = ("abc", "ks", "cvm", "pepe", "zabc")
_FAMILY_CODES = {"N": "normal", "Po": "poisson", "R": "rademacher"}
_NAME = re.compile(r"^(abc|ks|cvm|pepe|zabc)(?:-(c?)(N|Po|R))?(-adj)?$")


class ConfigError(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


# -- samplers ----------------------------------------------------------------------


def sample_event_model1(group: int, c: float, rng: np.random.Generator, size=None):
    """Event time and cause under Model 1.

    Group 1 has all-cause hazard 1 (T ~ Exp(1)) and picks cause 1 with
    probability ``exp(-T)``; group 2 has all-cause hazard 2 and picks cause 1
    with probability ``c / 2``.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c}")
    if group == 1:
        t = rng.exponential(1.0, size)
        p1 = np.exp(-t)
    elif group == 2:
        t = rng.exponential(0.5, size)
        p1 = c / 2.0
    else:
        raise ValueError(f"unknown group {group!r}")
    cause = np.where(rng.random(size) < p1, 1, 2)
    return (float(t), int(cause)) if size is None else (t, cause)


def sample_event_model2(beta: float, a: float, p: float, rng: np.random.Generator, size=None):
    """Event time from ``1 - exp(-beta t^a)`` by inversion, cause 1 with probability ``p``."""
    if not (beta > 0 and a > 0):
        raise ValueError("beta and a must be positive")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    u = 1.0 - rng.random(size)  # in (0, 1]
    t = (-np.log(u) / beta) ** (1.0 / a)
    cause = np.where(rng.random(size) < p, 1, 2)
    return (float(t), int(cause)) if size is None else (t, cause)


# -- censoring ---------------------------------------------------------------------


@dataclass(frozen=True)
class CensoringLaw:
    kind: str = "none"  # none | exponential | uniform
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "exponential", "uniform"):
            raise ValueError(f"unknown censoring law {self.kind!r}")
        if self.kind != "none" and not self.param > 0:
            raise ValueError(f"{self.kind} censoring needs a positive parameter")

    def draw(self, rng: np.random.Generator, size=None):
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.param, size)
        if self.kind == "uniform":
            return rng.uniform(0.0, self.param, size)
        return np.full(size, np.inf) if size is not None else np.inf


@dataclass(frozen=True)
class CensoringSpec:
    group1: CensoringLaw = CensoringLaw()
    group2: CensoringLaw = CensoringLaw()

    @classmethod
    def paired(cls, rate: float, bound: float) -> CensoringSpec:
        """Exponential(rate) censoring in group 1, uniform on [0, bound] in group 2."""
        g1 = CensoringLaw("exponential", rate) if rate > 0 else CensoringLaw()
        g2 = CensoringLaw("uniform", bound) if bound > 0 else CensoringLaw()
        return cls(g1, g2)

    def law(self, group: int) -> CensoringLaw:
        return self.group1 if group == 1 else self.group2

    @property
    def label(self) -> str:
        return f"{self.group1.param:.2g};{self.group2.param:.2g}"


def censor(times, causes, law: CensoringLaw, rng: np.random.Generator):
    """Observed exit times and statuses; an event tied with its censoring time wins."""
    times = np.asarray(times, dtype=float)
    c = law.draw(rng, times.shape)
    observed = times <= c
    return np.where(observed, times, c), np.where(observed, causes, 0)


def apply_censoring(event, spec: CensoringSpec, group: int, rng: np.random.Generator) -> Observation:
    t, cause = event
    c = spec.law(group).draw(rng)
    if t <= c:
        return Observation(0.0, t, int(cause), group)
    return Observation(0.0, float(c), 0, group)


# -- scenarios ---------------------------------------------------------------------


@dataclass(frozen=True)
class TestSpec:
    """One entry of a test roster, e.g. ``abc-cPo`` or ``ks-N-adj``."""

    __test__ = False

    kind: str
    multiplier: MultiplierSpec
    adjusted: bool = False

    @classmethod
    def parse(cls, name: str) -> TestSpec:
        m = _NAME.match(name.strip())
        if not m:
            raise ConfigError(f"unknown test {name!r}; valid names: {', '.join(valid_test_names())}")
        kind, corrected, family, adj = m.groups()
        return cls(kind, MultiplierSpec(_FAMILY_CODES[family or "Po"], corrected == "c"), adj is not None)

    @property
    def name(self) -> str:
        return f"{self.kind}-{self.multiplier.label}" + ("-adj" if self.adjusted else "")


def valid_test_names() -> list[str]:
    names = []
    for kind in KINDS:
        for corr in ("", "c"):
            for fam in _FAMILY_CODES:
                names.append(f"{kind}-{corr}{fam}")
    return names + ["<name>-adj"]


DEFAULT_ROSTER = ("abc-cPo",)


@dataclass(frozen=True)
class ScenarioConfig:
    model: int = 2
    hypothesis: str = "H0"
    c: float | None = None
    beta1: float | None = None
    beta2: float | None = None
    a1: float | None = None
    a2: float | None = None
    p: float | None = None
    censoring: CensoringSpec = CensoringSpec()
    n1: int = 50
    n2: int = 50
    window: Window = Window(0.0, 1.5)
    n_sim: int = 1000
    B: int = 500
    alpha: float = 0.05
    seed: int = 0
    roster: tuple = DEFAULT_ROSTER

    def __post_init__(self):
        if self.model not in (1, 2):
            raise ConfigError(f"model must be 1 or 2, got {self.model!r}")
        if self.hypothesis not in ("H0", "H1"):
            raise ConfigError(f"hypothesis must be H0 or H1, got {self.hypothesis!r}")
        if self.model == 1 and self.c is None:
            object.__setattr__(self, "c", MODEL1_C[self.hypothesis])
        if self.model == 2:
            preset = MODEL2_H0 if self.hypothesis == "H0" else MODEL2_H1
            for key, value in preset.items():
                if getattr(self, key) is None:
                    object.__setattr__(self, key, value)
        if self.model == 1 and not 0.0 <= self.c <= 1.0:
            raise ConfigError(f"c must lie in [0, 1], got {self.c}")
        if self.model == 2:
            if not (self.beta1 > 0 and self.beta2 > 0 and self.a1 > 0 and self.a2 > 0):
                raise ConfigError("beta and a parameters must be positive")
            if not 0.0 < self.p < 1.0:
                raise ConfigError(f"p must lie in (0, 1), got {self.p}")
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigError("sample sizes must be positive")
        if self.n_sim < 1 or self.B < 1:
            raise ConfigError("n_sim and B must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if not self.roster:
            raise ConfigError("test roster is empty")
        roster = tuple(TestSpec.parse(t).name if isinstance(t, str) else t.name for t in self.roster)
        object.__setattr__(self, "roster", roster)

    def sample_events(self, group: int, rng: np.random.Generator, size: int):
        if self.model == 1:
            return sample_event_model1(group, self.c, rng, size)
        beta, a = (self.beta1, self.a1) if group == 1 else (self.beta2, self.a2)
        return sample_event_model2(beta, a, self.p, rng, size)

    def simulate(self, rng: np.random.Generator, sizes=None) -> TwoSampleData:
        sizes = sizes or (self.n1, self.n2)
        exits, statuses, groups = [], [], []
        for group, size in zip((1, 2), sizes):
            t, cause = self.sample_events(group, rng, size)
            x, s = censor(t, cause, self.censoring.law(group), rng)
            exits.append(x)
            statuses.append(s)
            groups.append(np.full(size, group))
        return TwoSampleData.from_arrays(np.concatenate(exits), np.concatenate(statuses), np.concatenate(groups))

    @property
    def label(self) -> str:
        return (
            f"model{self.model}_{self.hypothesis}_n{self.n1}x{self.n2}_"
            f"cens{self.censoring.group1.param:.3g}-{self.censoring.group2.param:.3g}"
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = [self.window.t1, self.window.t2]
        d["roster"] = list(self.roster)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        d = dict(d)
        d["window"] = Window(*d["window"])
        cens = d["censoring"]
        d["censoring"] = CensoringSpec(CensoringLaw(**cens["group1"]), CensoringLaw(**cens["group2"]))
        d["roster"] = tuple(d["roster"])
        return cls(**d)


def empirical_censoring_rate(config: ScenarioConfig, n_events: int = 100_000, seed: int | None = None):
    """Fraction of censored records among ``n_events`` simulated subjects per group."""
    if n_events < 1:
        raise ValueError("n_events must be positive")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    rates = []
    for group in (1, 2):
        t, cause = config.sample_events(group, rng, n_events)
        _, status = censor(t, cause, config.censoring.law(group), rng)
        rates.append(float(np.mean(status == 0)))
    return tuple(rates)


# -- Monte Carlo -------------------------------------------------------------------


@dataclass(frozen=True)
class RejectionRow:
    test: str
    rejections: int
    n_sim: int

    @property
    def rate(self) -> float:
        return self.rejections / self.n_sim

    @property
    def se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.n_sim)

    def to_dict(self) -> dict:
        return {"test": self.test, "rejections": self.rejections, "n_sim": self.n_sim,
                "rate": self.rate, "se": self.se}


@dataclass(frozen=True)
class RejectionTable:
    config: ScenarioConfig
    rows: tuple = field(default_factory=tuple)

    def rate(self, test: str) -> float:
        return self.row(test).rate

    def row(self, test: str) -> RejectionRow:
        name = TestSpec.parse(test).name
        for r in self.rows:
            if r.test == name:
                return r
        raise KeyError(test)

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> RejectionTable:
        rows = tuple(RejectionRow(r["test"], r["rejections"], r["n_sim"]) for r in d["rows"])
        return cls(ScenarioConfig.from_dict(d["config"]), rows)


def _replication_rngs(seed: int, index: int):
    data_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    boot_seed = int(np.random.SeedSequence(seed, spawn_key=(index, 1)).generate_state(1, np.uint64)[0])
    return data_rng, boot_seed


def run_replication(config: ScenarioConfig, index: int) -> dict:
    """Simulate replication ``index`` and return the rejection decision of every test."""
    data_rng, boot_seed = _replication_rngs(config.seed, index)
    data = config.simulate(data_rng)
    specs = [TestSpec.parse(name) for name in config.roster]
    cache = {}
    decisions = {}
    for spec in specs:
        key = (spec.multiplier, spec.adjusted)
        try:
            if key not in cache:
                cache[key] = bootstrap_replicates(
                    data, config.window, spec.multiplier, config.B, boot_seed, spec.adjusted
                )
            raw = observed_statistic(data, config.window, spec.kind)
            column = cache[key][:, COLUMNS["abc" if spec.kind == "zabc" else spec.kind]]
            decisions[spec.name] = bool(decide(spec.kind, raw, column, config.alpha)[3])
        except Exception as exc:
            raise SimulationError(
                f"{config.label}: replication {index}, test {spec.name}: {exc}"
            ) from exc
    return decisions


def _run_chunk(config: ScenarioConfig, indices) -> list:
    return [(i, run_replication(config, i)) for i in indices]


def monte_carlo_rejection_rates(config: ScenarioConfig, workers: int = 1, progress=None) -> RejectionTable:
    """Rejection rates of every test in the roster over ``config.n_sim`` replications.

    Replication ``i`` uses streams derived from ``(config.seed, i)`` only, so
    the table is identical for any number of ``workers``.  ``progress`` is an
    optional callable receiving the number of finished replications.
    """
    indices = list(range(config.n_sim))
    results = {}
    if workers <= 1:
        for i in indices:
            results[i] = run_replication(config, i)
            if progress:
                progress(len(results))
    else:
        size = max(1, math.ceil(len(indices) / (4 * workers)))
        chunks = [indices[k:k + size] for k in range(0, len(indices), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, [config] * len(chunks), chunks):
                results.update(part)
                if progress:
                    progress(len(results))
    rows = []
    for name in config.roster:
        count = sum(results[i][name] for i in indices)
        rows.append(RejectionRow(name, int(count), config.n_sim))
    return RejectionTable(config, tuple(rows))


def scenario(model: int, hypothesis: str, **kwargs) -> ScenarioConfig:
    """Shorthand for a :class:`ScenarioConfig` with ``censoring=(rate, bound)`` allowed."""
    cens = kwargs.pop("censoring", None)
    if isinstance(cens, tuple):
        cens = CensoringSpec.paired(*cens)
    if cens is not None:
        kwargs["censoring"] = cens
    if "sizes" in kwargs:
        kwargs["n1"], kwargs["n2"] = kwargs.pop("sizes")
    return ScenarioConfig(model=model, hypothesis=hypothesis, **kwargs)


__all__ = [
    "CENSORING_SETUPS",
    "CensoringLaw",
    "CensoringSpec",
    "ConfigError",
    "RejectionRow",
    "RejectionTable",
    "ScenarioConfig",
    "SimulationError",
    "TestSpec",
    "apply_censoring",
    "censor",
    "empirical_censoring_rate",
    "monte_carlo_rejection_rates",
    "run_replication",
    "sample_event_model1",
    "sample_event_model2",
    "scenario",
    "valid_test_names",
]
