import pytest

from collapse_bounds.budget import TABLE1
from collapse_bounds.core import LPF_MASS


@pytest.fixture
def lpf():
    return LPF_MASS


@pytest.fixture
def device():
    return TABLE1


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
