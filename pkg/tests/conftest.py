import numpy as np
import pytest

from gvjump.rng import RandomStream


@pytest.fixture
def stream():
    return RandomStream(12345, 0)


@pytest.fixture
def nprng():
    return np.random.default_rng(2024)


ACCEPTANCE = []


def record(criterion, passed, detail):
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
