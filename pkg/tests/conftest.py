import numpy as np
import pytest

from gprsplit.grid import GridSpec
from gprsplit.model import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def periodic_grid():
    return GridSpec(8, 6, 0.3, 0.2, origin=(0.1, -0.4))


@pytest.fixture
def params():
    return ModelParams(gamma=1.4, cv=2.5, cs=1.0, ch=1.0, rho0=1.0, tau1=1.0, tau2=1.0)


def random_tensor(rng, shape, scale=0.1):
    """Distortions close to the identity with positive determinant."""
    return np.eye(3) + scale * rng.standard_normal(shape + (3, 3))


# acceptance verdicts, filled in by test_acceptance and printed after the run
ACCEPTANCE = {}


def record(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 12):
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN (deselected)")
