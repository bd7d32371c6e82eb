import numpy as np
import pytest

from lubrication import BoundaryConditions, GeometrySpec, build_profile

BFS = GeometrySpec("bfs", {"H_in": 2, "H_out": 1, "l": 8, "L": 16})
WEDGE = GeometrySpec("wedge", {"H_in": 2, "H_out": 1, "l_in": 7, "l_out": 7, "l_wedge": 2})
LOGISTIC = GeometrySpec("logistic", {"H_in": 2, "H_out": 1, "lambda": 32, "L": 16})
SINUSOID = GeometrySpec("sinusoid-periodic", {"H_0": 1, "delta": 0.5, "alpha": 2 * np.pi, "L": 1})


@pytest.fixture
def bfs():
    return build_profile(BFS)


@pytest.fixture
def wedge():
    return build_profile(WEDGE)


@pytest.fixture
def logistic():
    return build_profile(LOGISTIC)


@pytest.fixture
def unit_flux():
    return BoundaryConditions(Q=1.0, P_N=0.0, U=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# acceptance verdicts, printed together at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
