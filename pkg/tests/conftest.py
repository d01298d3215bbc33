import dataclasses

import pytest

from uavrelay import Density, Scenario

ACCEPTANCE_LINES = []


@pytest.fixture
def ex1():
    """GTs uniform on [0,1], GRs uniform on [2,3], r=2, h=0, one relay."""
    return Scenario(Density.uniform(0.0, 1.0), Density.uniform(2.0, 3.0))


@pytest.fixture
def unit_pair():
    return Scenario(Density.uniform(0.0, 1.0), Density.uniform(0.0, 1.0))


def with_n(scenario, n):
    return dataclasses.replace(scenario, n=n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
