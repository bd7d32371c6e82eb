import numpy as np
import pytest

from lubrication import (BoundaryConditions, GeometrySpec, PiecewiseConstant, assemble_fd,
                         build_profile, fd_pressure, solve_fd)
from lubrication.analysis import convergence_study, error_norms, sinusoid_exact_pressure
from lubrication.errors import TooFewPoints, ValidationError

from conftest import BFS, SINUSOID

FLAT = PiecewiseConstant([0.0, 1.0], [1.0])


def test_interior_stencil_flat():
    sys = assemble_fd(FLAT, BoundaryConditions(Q=1.0), 4)
    A = sys.dense_matrix()
    dx2 = 0.25 ** 2
    for i in (1, 2, 3):
        np.testing.assert_allclose(A[i, i - 1:i + 2], np.array([1, -2, 1]) / dx2)


def test_interior_rows_sum_to_zero(logistic):
    A = assemble_fd(logistic, BoundaryConditions(Q=1.0), 50).dense_matrix()
    np.testing.assert_allclose(A[1:-1].sum(axis=1), 0.0, atol=1e-9)


def test_inlet_row(bfs):
    sys = assemble_fd(bfs, BoundaryConditions(Q=1.0), 16)
    A = sys.dense_matrix()
    assert sys.b[0] == pytest.approx(-1.5)
    # second-order forward difference of p'(x_0)
    np.testing.assert_allclose(A[0, :3] * 2 * sys.dx, [-3, 4, -1])
    assert sys.b[-1] == 0.0 and A[-1, -1] == 1.0


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        assemble_fd(FLAT, BoundaryConditions(Q=1.0), 2)


def test_unknown_method():
    with pytest.raises(ValidationError):
        solve_fd(assemble_fd(FLAT, BoundaryConditions(Q=1.0), 8), method="cg")


@pytest.mark.parametrize("method", ["banded", "dense"])
def test_exact_for_linear_pressure(method):
    sol = fd_pressure(FLAT, BoundaryConditions(Q=1.0), 8, method=method)
    np.testing.assert_allclose(sol.values, 12 * (1 - sol.knots), atol=1e-12)


def test_pressure_mode_flat():
    sol = fd_pressure(FLAT, BoundaryConditions(P_0=12.0), 8)
    assert sol.bc.Q == pytest.approx(1.0, rel=1e-12)


def test_jump_heights_are_averaged(bfs):
    sys = assemble_fd(bfs, BoundaryConditions(Q=1.0), 4)
    np.testing.assert_array_equal(sys.h, [2, 2, 1.5, 1, 1])


def test_residual(logistic, rng):
    sys = assemble_fd(logistic, BoundaryConditions(Q=1.0, U=0.7), 200)
    p = solve_fd(sys).values
    assert np.max(np.abs(sys.residual(p))) <= 1e-9 * np.max(np.abs(sys.b))


def test_banded_and_dense_agree(logistic):
    bc = BoundaryConditions(Q=1.0, U=0.3)
    a = fd_pressure(logistic, bc, 300).values
    b = fd_pressure(logistic, bc, 300, method="dense").values
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_sinusoid_error_drops_fourfold():
    prof = build_profile(SINUSOID)
    bc = BoundaryConditions(Q=1.0, U=3.0)
    errs = []
    for n in (256, 512):
        sol = fd_pressure(prof, bc, n)
        exact = sinusoid_exact_pressure(1.0, 0.5, 2 * np.pi, 3.0, 1.0, sol.knots)
        errs.append(error_norms(sol.values, exact, sol.knots)[1])
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_second_order_on_sinusoid():
    rep = convergence_study("fd", SINUSOID, [64, 128, 256, 512, 1024],
                            BoundaryConditions(P_0=0.0, U=3.0))
    assert rep.reference == "exact-sinusoid"
    assert rep.orders["l2"] == pytest.approx(2.0, abs=0.2)


def test_first_order_on_step():
    rep = convergence_study("fd", BFS, [64, 128, 256, 512, 1024], BoundaryConditions(Q=1.0))
    assert rep.reference == "exact-piecewise"
    assert rep.orders["linf"] <= 1.3
    assert rep.orders["linf"] == pytest.approx(1.0, abs=0.2)
