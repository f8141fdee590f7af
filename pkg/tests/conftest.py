import numpy as np
import pytest

# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ac_report():
    def record(name: str, ok: bool, detail: str, elapsed: float, budget: float):
        status = "PASS" if ok and elapsed < budget else "FAIL"
        line = f"{name}: {status}  ({detail}; {elapsed:.2f}s of {budget:.0f}s)"
        ACCEPTANCE_LINES[name] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("-")[1])):
        terminalreporter.write_line(ACCEPTANCE_LINES[name])
