"""Shared fixtures and the acceptance-report hook."""

import pytest

from greybound import BlackHole

#: lines collected by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def schw():
    return BlackHole(mass=2.0)


@pytest.fixture
def rn():
    return BlackHole(mass=2.0, charge=1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
