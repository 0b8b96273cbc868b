import warnings

import pytest

from thinfilm.params import BetaZeroWarning


@pytest.fixture(autouse=True)
def _quiet_beta_zero():
    # beta_ent = 0 is the common default in these tests
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BetaZeroWarning)
        yield


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    """Store a criterion verdict; the lines are printed in the terminal summary."""
    ACCEPTANCE_LINES.append((number, f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"))
    print(ACCEPTANCE_LINES[-1][1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
