import math

import numpy as np
import pytest

from kuramoto3.model import Coupling

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _report(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mixed():
    """The coexistence case k1 = -k2 < 0 used throughout the decay analysis."""
    return Coupling(-1.0, 1.0)


STAR5 = np.array([0.0, 2 * math.pi / 3, math.pi / 3])
STAR6 = np.array([0.0, 4 * math.pi / 3, 5 * math.pi / 3])
