import numpy as np
import pytest

from jdpp import JKernel, PartitionedSpace

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fixture_kernel():
    """The valid 2x2 kernel [[.5, .5], [-.5, .5]] with X1 = {0}, X2 = {1}."""
    return JKernel(PartitionedSpace((1, 2)), [[0.5, 0.5], [-0.5, 0.5]])


@pytest.fixture
def invalid_kernel():
    """J-Hermitian, but hat spectrum is {-0.5, 1.5}."""
    return JKernel(PartitionedSpace((1, 2)), [[0.5, 1.0], [-1.0, 0.5]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
