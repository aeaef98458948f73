import numpy as np
import pytest

from jsdm_outage.config import DEFAULTS

ACCEPTANCE_LINES = []


def record(criterion, passed, detail=""):
    """Collect a one-line acceptance verdict, printed in the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def cfg():
    return DEFAULTS


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
