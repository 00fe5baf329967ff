import numpy as np
import pytest

from relasym.cli.config import parse_weight
from relasym.nikishin import default_system

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def plain_system():
    return default_system()


@pytest.fixture(scope="session")
def generic_system():
    return default_system(parse_weight("rational(2 + x)"), parse_weight("exp(0.5*x)"))


@pytest.fixture(scope="session")
def constant_system():
    return default_system(parse_weight("const(2)"), parse_weight("const(5)"))


@pytest.fixture(scope="session")
def abs_system():
    return default_system(parse_weight("abs(x)"), parse_weight("exp(0.5*x)"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
