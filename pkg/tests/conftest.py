import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ppfa import Fa


def fa_a():
    """Two start nodes, one offering a, the other b."""
    return Fa({"s1", "s2", "t1", "t2"}, {"s1", "s2"}, {("s1", "a", "t1"), ("s2", "b", "t2")})


def fa_b(action="c"):
    return Fa({"s", "t"}, {"s"}, {("s", action, "t")})


@pytest.fixture
def example_a():
    return fa_a()


@pytest.fixture
def example_b():
    return fa_b()


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
