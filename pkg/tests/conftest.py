import numpy as np
import pytest

from beliefavg.topology import Graph

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def path3():
    return Graph(3, ((0, 1), (1, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
