import numpy as np
import pytest
from hypothesis import strategies as st

from qoracle.oracles import FunctionTable


def function_tables(n_max=2, m_max=2, n_min=1, m_min=1):
    """Hypothesis strategy for small value tables."""

    @st.composite
    def build(draw):
        n = draw(st.integers(n_min, n_max))
        m = draw(st.integers(m_min, m_max))
        values = draw(st.lists(st.integers(0, 2**m - 1), min_size=2**n, max_size=2**n))
        return FunctionTable(n, m, tuple(values))

    return build()


def permutations(n_max=3, n_min=1):
    @st.composite
    def build(draw):
        n = draw(st.integers(n_min, n_max))
        perm = draw(st.permutations(list(range(2**n))))
        return FunctionTable(n, n, tuple(perm))

    return build()


seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
