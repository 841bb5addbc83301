import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


CRITERIA: dict[tuple[int, str], str] = {}


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL/SKIP line for an acceptance criterion."""

    def record(number, ok, detail, label=""):
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"criterion {number}{label}: {status}  {detail}"
        CRITERIA[number, label] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for key in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[key])
