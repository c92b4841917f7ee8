import numpy as np
import pytest

from qmatfun.matcore import random_density, random_psd


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def commuting_pair():
    return np.diag([0.75, 0.25]), np.diag([0.5, 0.5])


@pytest.fixture
def state_pair():
    """A generic 4x4 pair with moderate conditioning."""
    return random_density(4, 3.0, seed=7), random_density(4, 4.0, seed=8)


@pytest.fixture
def psd_pair():
    return random_psd(4, 0.2, seed=3), random_psd(4, 0.2, seed=4)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Record a one-line verdict; echoed live and repeated in the terminal summary."""

    def log(line):
        _ACCEPTANCE_LINES.append(line)
        print("\n" + line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
