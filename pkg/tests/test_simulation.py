import math

import numpy as np
import pytest
from scipy import stats

from cifabc import Window, aalen_johansen, abc_statistic
from cifabc.simulation import (
    CENSORING_SETUPS,
    CensoringLaw,
    CensoringSpec,
    ConfigError,
    RejectionTable,
    ScenarioConfig,
    SimulationError,
    TestSpec,
    apply_censoring,
    censor,
    empirical_censoring_rate,
    monte_carlo_rejection_rates,
    run_replication,
    sample_event_model1,
    sample_event_model2,
    scenario,
)

N = 100_000


class TestModel1:
    def test_group1_marginal(self):
        t, _ = sample_event_model1(1, 0.65, np.random.default_rng(1), N)
        assert stats.kstest(t, "expon").pvalue > 0.01

    def test_group2_marginal(self):
        t, _ = sample_event_model1(2, 0.65, np.random.default_rng(2), N)
        assert stats.kstest(t, "expon", args=(0, 0.5)).pvalue > 0.01

    def test_group2_cause_fraction(self):
        _, cause = sample_event_model1(2, 0.65, np.random.default_rng(3), N)
        se = math.sqrt(0.325 * 0.675 / N)
        assert abs(np.mean(cause == 1) - 0.325) < 3 * se

    def test_group1_cause_fraction(self):
        # P(cause 1) = int e^{-t} e^{-t} dt = 1/2
        _, cause = sample_event_model1(1, 0.65, np.random.default_rng(4), N)
        assert abs(np.mean(cause == 1) - 0.5) < 3 * math.sqrt(0.25 / N)

    def test_null_closed_form(self):
        # group 1: int_0^t e^{-2u} du; group 2 with c = 1: (1/2)(1 - e^{-2t})
        t = np.linspace(0, 3, 13)
        g1 = np.array([stats_quad(lambda u: np.exp(-2 * u), 0, x) for x in t])
        np.testing.assert_allclose(g1, (1 - np.exp(-2 * t)) / 2, atol=1e-10)

    def test_null_estimates_agree(self):
        cfg = scenario(1, "H0", sizes=(10_000, 10_000))
        d = cfg.simulate(np.random.default_rng(5))
        grid = np.linspace(0, 3, 301)
        f1 = aalen_johansen(d, 1, 1)(grid)
        f2 = aalen_johansen(d, 2, 1)(grid)
        assert np.max(np.abs(f1 - f2)) <= 0.02
        assert np.max(np.abs(f1 - (1 - np.exp(-2 * grid)) / 2)) <= 0.02

    def test_scalar_draw(self):
        t, c = sample_event_model1(1, 1.0, np.random.default_rng(0))
        assert isinstance(t, float) and c in (1, 2)

    @pytest.mark.parametrize("c", [-0.1, 1.1])
    def test_bad_c(self, c):
        with pytest.raises(ValueError):
            sample_event_model1(1, c, np.random.default_rng(0))


def stats_quad(f, a, b):
    from scipy.integrate import quad

    return quad(f, a, b)[0]


class TestModel2:
    def test_marginal(self):
        beta, a = 1.2**-3.8, 3.8
        t, _ = sample_event_model2(beta, a, 0.6, np.random.default_rng(6), N)
        cdf = lambda x: 1 - np.exp(-beta * x**a)  # noqa: E731
        assert stats.kstest(t, cdf).pvalue > 0.01

    def test_cause_fraction(self):
        _, cause = sample_event_model2(1.0, 2.0, 0.6, np.random.default_rng(7), N)
        assert abs(np.mean(cause == 1) - 0.6) < 3 * math.sqrt(0.24 / N)

    def test_median(self):
        beta = 3**-1.2
        median = (math.log(2) / beta) ** (1 / 3)
        assert median == pytest.approx(1.3733, abs=1e-4)
        t, _ = sample_event_model2(beta, 3.0, 0.6, np.random.default_rng(8), N)
        # sample median standard error is about 1 / (2 f(m) sqrt(N))
        f_m = 3 * beta * median**2 * 0.5
        assert abs(np.median(t) - median) < 3 / (2 * f_m * math.sqrt(N))

    def test_p_one(self):
        _, cause = sample_event_model2(1.0, 1.0, 1.0, np.random.default_rng(9), 1000)
        assert np.all(cause == 1)

    @pytest.mark.parametrize("args", [(0.0, 1.0, 0.5), (1.0, -1.0, 0.5), (1.0, 1.0, 0.0)])
    def test_bad_parameters(self, args):
        with pytest.raises(ValueError):
            sample_event_model2(*args, np.random.default_rng(0))


class TestCensoring:
    def test_none_never_censors(self):
        t = np.random.default_rng(0).exponential(1, 1000)
        x, s = censor(t, np.ones(1000, int), CensoringLaw(), np.random.default_rng(1))
        assert np.all(s > 0) and np.array_equal(x, t)

    def test_censored_record(self):
        class Fixed:
            def __init__(self, value):
                self.value = value

            def uniform(self, lo, hi, size=None):
                return self.value

        spec = CensoringSpec(CensoringLaw(), CensoringLaw("uniform", 2.0))
        obs = apply_censoring((1.0, 1), spec, 2, Fixed(0.5))
        assert (obs.entry, obs.exit, obs.status, obs.group) == (0.0, 0.5, 0, 2)
        tie = apply_censoring((1.0, 2), spec, 2, Fixed(1.0))
        assert (tie.exit, tie.status) == (1.0, 2)

    def test_pairing(self):
        spec = CensoringSpec.paired(1 / 3, 1.6)
        assert spec.group1 == CensoringLaw("exponential", 1 / 3)
        assert spec.group2 == CensoringLaw("uniform", 1.6)
        assert CensoringSpec.paired(0, 0) == CensoringSpec()

    def test_bad_law(self):
        with pytest.raises(ValueError):
            CensoringLaw("weibull", 1.0)
        with pytest.raises(ValueError):
            CensoringLaw("uniform", 0.0)

    @pytest.mark.parametrize(
        "model, hyp, setup, expected",
        [(1, "H0", (1 / 3, 1.6), (0.25, 0.30)), (2, "H1", (1.0, 1.6), (0.64, 0.68)), (2, "H0", (0, 0), (0, 0))],
    )
    def test_rate_examples(self, model, hyp, setup, expected):
        rates = empirical_censoring_rate(scenario(model, hyp, censoring=setup), N, seed=1)
        assert rates == pytest.approx(expected, abs=0.01)

    def test_setups(self):
        assert len(CENSORING_SETUPS) == 7


class TestConfig:
    def test_presets(self):
        cfg = scenario(2, "H1")
        assert (cfg.a1, cfg.a2, cfg.p) == (3.8, 1.5, 0.6)
        assert scenario(1, "H1").c == 0.65 and scenario(1, "H0").c == 1.0
        assert cfg.window == Window(0, 1.5)

    def test_explicit_parameters_kept(self):
        assert scenario(2, "H0", beta1=3**-1.2).beta1 == 3**-1.2

    @pytest.mark.parametrize(
        "kw",
        [{"model": 3}, {"hypothesis": "H2"}, {"c": 2.0, "model": 1}, {"p": 1.0}, {"n1": 0}, {"alpha": 1.0},
         {"roster": ()}, {"roster": ("abc-X",)}],
    )
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            ScenarioConfig(**kw)

    def test_roster_names(self):
        assert TestSpec.parse("abc").name == "abc-Po"
        assert TestSpec.parse("ks-cN-adj").name == "ks-cN-adj"
        with pytest.raises(ConfigError, match="valid names"):
            TestSpec.parse("gray")

    def test_dict_round_trip(self):
        cfg = scenario(2, "H1", censoring=(2 / 3, 2.5), sizes=(30, 40), roster=("abc-cPo", "pepe"))
        assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


class TestMonteCarlo:
    small = scenario(2, "H0", sizes=(25, 25), n_sim=6, B=49, roster=("abc-cPo", "ks", "pepe", "zabc"))

    def test_single_replication(self):
        t = monte_carlo_rejection_rates(scenario(2, "H0", sizes=(20, 20), n_sim=1, B=49))
        assert t.rate("abc-cPo") in (0.0, 1.0)

    def test_deterministic_and_worker_independent(self):
        a = monte_carlo_rejection_rates(self.small)
        b = monte_carlo_rejection_rates(self.small, workers=2)
        assert a == b
        assert RejectionTable.from_dict(a.to_dict()) == a

    def test_replication_reproducible(self):
        assert run_replication(self.small, 3) == run_replication(self.small, 3)

    def test_table_invariants(self):
        t = monte_carlo_rejection_rates(self.small)
        for row in t.rows:
            assert row.rate * row.n_sim == row.rejections
            assert row.se == pytest.approx(math.sqrt(row.rate * (1 - row.rate) / row.n_sim))

    def test_progress(self):
        seen = []
        monte_carlo_rejection_rates(self.small, progress=seen.append)
        assert seen == list(range(1, 7))

    def test_labeled_failure(self):
        # a single-subject group exhausts its risk set: the adjusted test cannot run
        cfg = scenario(2, "H0", sizes=(1, 20), n_sim=2, B=10, roster=("abc-Po-adj",), window=Window(0, 5))
        with pytest.raises(SimulationError, match="replication 0, test abc-Po-adj"):
            monte_carlo_rejection_rates(cfg)

    def test_abc_median_grows_under_alternative(self):
        medians = []
        for n in (50, 100, 200):
            cfg = scenario(1, "H1", sizes=(n, n))
            vals = []
            for i in range(200):
                d = cfg.simulate(np.random.default_rng([n, i]))
                f1 = aalen_johansen(d, 1, 1).estimate
                f2 = aalen_johansen(d, 2, 1).estimate
                vals.append(abc_statistic(f1, f2, cfg.window, sizes=d.sizes).value)
            medians.append(np.median(vals))
        assert medians[0] < medians[1] < medians[2]

    @pytest.mark.slow
    def test_level_at_n400(self):
        cfg = scenario(2, "H0", sizes=(400, 400), n_sim=1000, B=500, roster=("abc-Po",), seed=2)
        rate = monte_carlo_rejection_rates(cfg).rate("abc-Po")
        assert 0.05 - 3 * math.sqrt(0.0475 / 1000) <= rate <= 0.05 + 3 * math.sqrt(0.0475 / 1000)
