import math

import pytest

from periodax.signal import PeriodicSignal

SQRT2 = math.sqrt(2.0)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def f1():
    """sqrt(2) cos(2 pi x)."""
    return PeriodicSignal.from_cosines({1: SQRT2})


@pytest.fixture(scope="session")
def f13():
    """f1 plus a 0.15 sqrt(2) cos(6 pi x) harmonic."""
    return PeriodicSignal.from_cosines({1: SQRT2, 3: 0.15 * SQRT2})


@pytest.fixture(scope="session")
def zero_signal():
    return PeriodicSignal([0.0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
