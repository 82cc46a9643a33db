import math

import pytest

from starshare import model


def theta_at(c):
    """State angle with concurrence ``c`` (independent of the library helper)."""
    return 0.5 * math.asin(c)


@pytest.fixture
def depth5():
    theta = math.pi / 4 - 0.01
    return dict(theta=theta, delta=model.canonical_delta(theta), epsilon=1e-2,
                alpha1=1e-10, omega=math.pi / 4 * 1e-7)


ACCEPTANCE_LINES: dict[int, str] = {}


def record(number, name, ok, detail=""):
    ACCEPTANCE_LINES[number] = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
