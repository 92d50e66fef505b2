import numpy as np
import pytest

from selfdual.helical import build_basis
from selfdual.spectral import make_grid


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8)


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16)


@pytest.fixture(scope="session")
def basis8(grid8):
    return build_basis(grid8)


@pytest.fixture(scope="session")
def basis16(grid16):
    return build_basis(grid16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel(a, b):
    """Relative difference of two arrays or fields."""
    a = getattr(a, "coef", a)
    b = getattr(b, "coef", b)
    scale = np.linalg.norm(b)
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / (scale if scale > 0 else 1.0)


# one summary line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
