import numpy as np
import pytest

from dualrail.config import load_preset

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def table1():
    return load_preset("table1").params


@pytest.fixture(scope="session")
def table2():
    return load_preset("table2").params


@pytest.fixture(scope="session")
def fig2():
    return load_preset("fig2").params


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
