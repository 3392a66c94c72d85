import numpy as np
import pytest

from fsimpute.numerics import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def nprng():
    return np.random.default_rng(20240611)


def random_mask(nprng, n, d, rate=0.3):
    """Random mask that keeps at least one observed cell per column."""
    m = nprng.uniform(size=(n, d)) > rate
    m[nprng.integers(n, size=d), np.arange(d)] = True
    return m


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
