import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from doseorder.protocol33 import enumerate_protocol  # noqa: E402
from doseorder.tally import Tally  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def table2():
    return enumerate_protocol(2)


@pytest.fixture(scope="session")
def table3():
    return enumerate_protocol(3)


@st.composite
def tallies(draw, D=None, nmax=4, max_D=3):
    if D is None:
        D = draw(st.integers(1, max_D))
    pairs = []
    for _ in range(D):
        n = draw(st.integers(0, nmax))
        pairs.append((draw(st.integers(0, n)), n))
    return Tally.from_pairs(pairs)


@st.composite
def tally_tuples(draw, k, nmax=4, max_D=3):
    D = draw(st.integers(1, max_D))
    return tuple(draw(tallies(D=D, nmax=nmax)) for _ in range(k))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
