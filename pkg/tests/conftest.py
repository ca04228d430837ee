import warnings

import numpy as np
import pytest

from quarter_green.walk_model import SU3, kernel_from_cubic_family, sample_family

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def su3():
    return SU3


@pytest.fixture(scope="session")
def family_sample():
    """Twenty feasible family points with their kernels, fixed by seed."""
    params = sample_family(np.random.default_rng(20240601), 20)
    return [(c, kernel_from_cubic_family(c)) for c in params]


@pytest.fixture(autouse=True)
def _quiet_sign_gate():
    # the positivity gate warns whenever it flips the assembled constant
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="assembled constant is negative")
        yield


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""

    def log(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
