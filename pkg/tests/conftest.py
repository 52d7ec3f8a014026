import sys

import numpy as np
import pytest
from hypothesis import settings

from ergodic_pde import Domain1D, EquationParams, Forcing

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

SAMPLE = [(0.0, 1.5), (0.0, 2.0), (1.0, 2.5), (-0.5, 1.25)]


@pytest.fixture
def unit():
    return Domain1D.interval(0.0, 1.0)


@pytest.fixture
def lasry_lions():
    return EquationParams(0.0, 2.0, lam=1.0)


def zero():
    return Forcing.constant(0.0)


def admissible(alpha, frac):
    """beta in (alpha+1, alpha+2] from a fraction in (0, 1]."""
    return alpha + 1.0 + frac


def assert_close(a, b, rtol):
    assert np.isclose(a, b, rtol=rtol, atol=0), (a, b)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
