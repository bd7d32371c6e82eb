"""Finite-difference baseline for the Reynolds equation on a uniform grid.

Interior rows use half-grid averaged cubes,

    [(h_{i+1}^3 + h_i^3) p_{i+1} - (h_{i+1}^3 + 2 h_i^3 + h_{i-1}^3) p_i
     + (h_i^3 + h_{i-1}^3) p_{i-1}] / (2 dx^2) = 6 eta U (h_{i+1} - h_{i-1}) / (2 dx),

the inlet row imposes the flux through a second-order one-sided difference
and the outlet row fixes ``p_N = P_N``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .core import BoundaryConditions, LinearPressure
from .errors import SingularMatrix, TooFewPoints, ValidationError
from .geometry import check_positive, uniform_knots


@dataclass(frozen=True)
class FDSystem:
    """Banded (N+1)-row system; ``ab`` uses the ``solve_banded`` layout (1, 2)."""

    profile: object
    bc: BoundaryConditions
    x: np.ndarray
    h: np.ndarray
    ab: np.ndarray
    b: np.ndarray

    @property
    def N(self):
        return self.x.size - 1

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    def dense_matrix(self):
        n = self.N + 1
        A = np.zeros((n, n))
        for offset, row in zip((2, 1, 0, -1), self.ab):
            if offset >= 0:
                idx = np.arange(n - offset)
                A[idx, idx + offset] = row[offset:]
            else:
                idx = np.arange(n + offset)
                A[idx - offset, idx] = row[:offset]
        return A

    def residual(self, p):
        return self.dense_matrix() @ p - self.b


def grid_heights(profile, x):
    """Heights at grid points; at a jump the one-sided limits are averaged."""
    if profile.is_piecewise:
        return 0.5 * (np.asarray(profile(x, "left")) + np.asarray(profile(x, "right")))
    return np.asarray(profile(x), dtype=float)


def assemble_fd(profile, bc: BoundaryConditions, N) -> FDSystem:
    if int(N) != N or N < 3:
        raise TooFewPoints("the one-sided inlet stencil needs N >= 3 intervals")
    N = int(N)
    x = uniform_knots(profile, N)
    if not profile.is_piecewise:
        check_positive(profile, 10 * N)
    h = grid_heights(profile, x)
    dx = float(x[1] - x[0])
    eta, U = bc.eta, bc.U
    h3 = h ** 3

    n = N + 1
    ab = np.zeros((4, n))  # rows: 2nd super, 1st super, diagonal, sub
    b = np.zeros(n)
    s = 0.5 / dx ** 2
    i = np.arange(1, N)
    ab[1, i + 1] = s * (h3[i + 1] + h3[i])         # coefficient on p_{i+1}
    ab[2, i] = -s * (h3[i + 1] + 2.0 * h3[i] + h3[i - 1])
    ab[3, i - 1] = s * (h3[i] + h3[i - 1])         # coefficient on p_{i-1}
    b[i] = 6.0 * eta * U * (h[i + 1] - h[i - 1]) / (2.0 * dx)

    if bc.is_dirichlet:
        ab[2, 0] = 1.0
        b[0] = bc.P_0
    else:
        # forward one-sided derivative (-3 p_0 + 4 p_1 - p_2) / (2 dx)
        ab[2, 0] = -3.0 / (2.0 * dx)
        ab[1, 1] = 4.0 / (2.0 * dx)
        ab[0, 2] = -1.0 / (2.0 * dx)
        b[0] = -12.0 * eta * bc.Q / h3[0] + 6.0 * eta * U / h[0] ** 2
    ab[2, N] = 1.0
    b[N] = bc.P_N
    return FDSystem(profile, bc, x, h, ab, b)


def solve_fd(system: FDSystem, method="banded") -> LinearPressure:
    """Direct solve; ``method`` is ``"banded"`` (O(N)) or ``"dense"`` (LU, O(N^3))."""
    try:
        if method == "banded":
            p = solve_banded((1, 2), system.ab, system.b, check_finite=False)
        elif method == "dense":
            p = np.linalg.solve(system.dense_matrix(), system.b)
        else:
            raise ValidationError(f"unknown FD method {method!r}")
    except (LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularMatrix(f"finite-difference system is singular: {exc}") from None
    if not np.all(np.isfinite(p)):
        raise SingularMatrix("finite-difference solve produced non-finite values")
    bc = system.bc
    if bc.is_dirichlet:
        dx, h0 = system.dx, system.h[0]
        g0 = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * dx)
        bc = bc.with_flux(-(h0 ** 3 * g0 - 6.0 * bc.eta * bc.U * h0) / (12.0 * bc.eta))
    p[-1] = system.bc.P_N
    return LinearPressure(system.profile, bc, system.x, p, "fd")


def fd_pressure(profile, bc: BoundaryConditions, N, method="banded") -> LinearPressure:
    return solve_fd(assemble_fd(profile, bc, N), method=method)
