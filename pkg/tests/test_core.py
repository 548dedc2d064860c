import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cifabc import DataError, Observation, StepFunction, at_risk, counting_process, validate

from .conftest import datasets


def tie_oracle(records):
    times = sorted(r[1] for r in records if r[2] > 0)
    out = {}
    i = 0
    while i < len(times):
        j = i
        while j < len(times) and times[j] == times[i]:
            j += 1
        if j - i > 1:
            out[times[i]] = j - i
        i = j
    return out


class TestValidate:
    def test_valid_sample(self):
        d = validate([(0, 1, 1, 1), (0, 2, 0, 1), (0, 1.5, 2, 2)])
        assert list(d.event_times) == [1.0, 1.5]
        assert d.n == 3
        assert d.sizes == (2, 1)
        assert d.ties == {}

    def test_entry_not_before_exit(self):
        with pytest.raises(DataError, match="entry"):
            validate([(2, 1, 1, 1), (0, 1, 1, 2)])

    def test_tie_report(self):
        recs = [(0, 1, 1, 1), (0, 1, 1, 1), (0, 3, 1, 2)]
        d = validate(recs)
        assert d.ties == tie_oracle(recs) == {1.0: 2}

    def test_ties_across_groups_and_causes(self):
        recs = [(0, 2, 1, 1), (0, 2, 2, 2), (0, 2, 0, 2), (0, 5, 1, 1)]
        assert validate(recs).ties == tie_oracle(recs) == {2.0: 2}

    @pytest.mark.parametrize(
        "records, match",
        [
            ([(0, 1, 1, 1)], "group 2 is empty"),
            ([(0, 1, 3, 1), (0, 1, 1, 2)], "status"),
            ([(0, 1, 1, 3), (0, 1, 1, 2)], "group"),
            ([(0, float("inf"), 1, 1), (0, 1, 1, 2)], "non-finite"),
            ([(0, float("nan"), 1, 1), (0, 1, 1, 2)], "non-finite"),
            ([], "no observations"),
        ],
    )
    def test_errors(self, records, match):
        with pytest.raises(DataError, match=match):
            validate(records)

    def test_three_tuples_default_entry(self):
        d = validate([(1.0, 1, 1), (2.0, 0, 2)])
        assert d.group1.entry.tolist() == [0.0]

    def test_observation_rejects_bad_record(self):
        with pytest.raises(DataError):
            Observation(1.0, 1.0, 1, 1)

    def test_round_trip_observations(self):
        recs = [(0.0, 1.0, 1, 1), (0.5, 2.0, 0, 1), (0.0, 1.5, 2, 2)]
        d = validate(recs)
        assert sorted((o.entry, o.exit, o.status, o.group) for o in d.observations()) == sorted(recs)

    def test_immutable(self):
        d = validate([(0, 1, 1, 1), (0, 2, 1, 2)])
        with pytest.raises(ValueError):
            d.group1.exit[0] = 5.0


def risk_oracle(entries, exits, t):
    return sum(1 for a, b in zip(entries, exits) if a < t <= b)


class TestAtRisk:
    data = validate([(0.5, 2, 1, 1), (0, 1, 1, 1), (0, 9, 0, 2)])

    @pytest.mark.parametrize("t, expected", [(0.75, 2), (1.5, 1), (0.25, 1)])
    def test_examples(self, t, expected):
        assert expected == risk_oracle([0.5, 0], [2, 1], t)
        assert at_risk(self.data, 1, t) == expected

    def test_exit_time_still_at_risk(self):
        assert at_risk(self.data, 1, 1.0) == 2
        assert at_risk(self.data, 1, 2.0) == 1
        assert at_risk(self.data, 1, 2.0001) == 0

    def test_entry_time_not_at_risk(self):
        assert at_risk(self.data, 1, 0.5) == 1

    def test_unknown_group(self):
        with pytest.raises(DataError):
            at_risk(self.data, 3, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(datasets(), st.lists(st.floats(0, 12), min_size=1, max_size=10))
    def test_matches_oracle(self, data, ts):
        for label in (1, 2):
            g = data.group(label)
            for t in ts:
                assert at_risk(data, label, t) == risk_oracle(g.entry, g.exit, t) <= g.size

    @settings(max_examples=40, deadline=None)
    @given(datasets())
    def test_nonincreasing_after_last_entry(self, data):
        g = data.group1
        ts = np.linspace(g.entry.max(), g.exit.max() + 1, 50)[1:]
        y = at_risk(data, 1, ts)
        assert np.all(np.diff(y) <= 0)


class TestCountingProcess:
    def test_single_event(self):
        d = validate([(0, 1, 1, 1), (0, 2, 0, 2)])
        n1 = counting_process(d, 1, 1)
        assert n1.jump_times.tolist() == [1.0]
        assert n1(0.999) == 0 and n1(1.0) == 1

    def test_no_events(self):
        d = validate([(0, 1, 1, 1), (0, 2, 0, 2)])
        assert counting_process(d, 1, 2) == StepFunction.constant(0.0)

    def test_tied_events(self):
        d = validate([(0, 1, 1, 1), (0, 1, 1, 1), (0, 2, 0, 2)])
        n1 = counting_process(d, 1, 1)
        assert n1(1.0) == 2 and n1.jump_times.tolist() == [1.0]

    def test_unknown_cause(self):
        d = validate([(0, 1, 1, 1), (0, 2, 0, 2)])
        with pytest.raises(DataError):
            counting_process(d, 1, 3)

    @settings(max_examples=60, deadline=None)
    @given(datasets())
    def test_invariants(self, data):
        grid = np.linspace(0, 13, 60)
        for label in (1, 2):
            g = data.group(label)
            n1, n2, n = (counting_process(data, label, k) for k in (1, 2, None))
            assert n1(np.inf) == np.sum(g.status == 1)
            assert n2(np.inf) == np.sum(g.status == 2)
            np.testing.assert_array_equal(n1(grid) + n2(grid), n(grid))
            assert np.all(np.diff(n(grid)) >= 0)


class TestStepFunction:
    def test_right_continuous(self):
        f = StepFunction([1.0, 2.0], [0.5, 0.75], 0.0)
        assert f(0.999) == 0.0 and f(1.0) == 0.5 and f(1.5) == 0.5 and f(2.0) == 0.75
        assert f.left_limit(1.0) == 0.0 and f.left_limit(2.0) == 0.5
        assert f.final_value == 0.75

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            StepFunction([2.0, 1.0], [0.1, 0.2])
        with pytest.raises(ValueError):
            StepFunction([1.0, 1.0], [0.1, 0.2])

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(-100, 100, allow_nan=False), min_size=0, max_size=20, unique=True),
        st.lists(st.floats(-200, 200, allow_nan=False), min_size=1, max_size=30),
        st.floats(-5, 5, allow_nan=False),
    )
    def test_evaluation_matches_linear_scan(self, jumps, queries, init):
        jumps = sorted(jumps)
        values = [float(i) * 0.5 + 1 for i in range(len(jumps))]
        f = StepFunction(jumps, values, init)

        def scan(t):
            out = init
            for s, v in zip(jumps, values):
                if s <= t:
                    out = v
            return out

        got = f(np.array(queries))
        assert got.tolist() == [scan(q) for q in queries]
