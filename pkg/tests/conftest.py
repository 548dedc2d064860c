import numpy as np
import pytest
from hypothesis import strategies as st

from cifabc import TwoSampleData


@st.composite
def datasets(draw, max_size=30, truncation=True, ties=True):
    """Random two-group samples; times on a coarse lattice when ``ties``."""
    records = []
    for group in (1, 2):
        n = draw(st.integers(1, max_size))
        for _ in range(n):
            if ties:
                exit_ = draw(st.integers(1, 12)) / 2.0
            else:
                exit_ = draw(st.floats(0.01, 10.0, allow_nan=False))
            entry = 0.0
            if truncation and draw(st.booleans()):
                entry = draw(st.floats(0.0, exit_, exclude_max=True, allow_nan=False))
            status = draw(st.integers(0, 2))
            records.append((entry, exit_, status, group))
    entry, exit_, status, group = map(np.array, zip(*records))
    return TwoSampleData.from_arrays(exit_, status, group, entry=entry)


def random_data(rng, n1, n2, censor=0.3, truncate=0.0):
    """Exponential event times, random causes, exponential censoring."""
    out = []
    for group, n in ((1, n1), (2, n2)):
        t = rng.exponential(1.0, n)
        cause = rng.integers(1, 3, n)
        c = rng.exponential(1.0 / censor, n) if censor > 0 else np.full(n, np.inf)
        x = np.minimum(t, c)
        s = np.where(t <= c, cause, 0)
        entry = np.where(rng.random(n) < truncate, rng.uniform(0, 1, n) * x, 0.0)
        out.append((entry, x, s, np.full(n, group)))
    entry, x, s, g = (np.concatenate(parts) for parts in zip(*out))
    return TwoSampleData.from_arrays(x, s, g, entry=entry)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance report -------------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}")
