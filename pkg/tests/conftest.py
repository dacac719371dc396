import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# Model I and II of the simulation study, plus the MSV truth used for recovery
MODEL_I = dict(phi=0.92, sigma=1.5, beta=0.1)
MODEL_II = dict(phi=0.97, sigma=1.0, beta=0.1)
MSV_TRUTH = dict(phi=0.86, sigma=0.32, betas=(1.64, 1.62, 1.42))

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; echoed in the terminal summary."""

    def _report(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
