from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

# Six forecasts for a single win/draw/loss match; the match is won (category 0).
MATCH = {
    "A": (1.0, 0.0, 0.0),
    "B": (0.5, 0.5, 0.0),
    "C": (0.5, 0.3, 0.2),
    "D": (0.55, 0.45, 0.0),
    "E": (1 / 3, 1 / 3, 1 / 3),
    "F": (0.0, 1.0, 0.0),
}


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def check(number, title, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
