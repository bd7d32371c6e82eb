"""Exact Reynolds solution for piecewise-linear film heights.

On an interval with slope ``m`` the pressure integrates in closed form,

    p(x) = -(C_Q h^-2 / 2 + 6 eta U h^-1) / m + C_P[k]      (m != 0)
    p(x) = (C_Q h^-3 + 6 eta U h^-2) (x - x_k) + C_P[k]     (m == 0)

with ``C_Q = -12 eta Q``.  Continuity at each interior knot gives one row per
knot (four cases by which neighbours are flat) and the outlet pressure fixes
``C_P[N-1]``.  The resulting Schur block is upper bidiagonal with entries
-1/+1, whose inverse is all -1, so the constants follow from a single
backward partial sum in O(N).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import BoundaryConditions, PressureSolution, resolve_flux
from .errors import ValidationError
from .geometry import PiecewiseConstant, PiecewiseLinear

# intervals with |h_end - h_start| <= ZERO_SLOPE_RTOL * max(h) are flat
ZERO_SLOPE_RTOL = 1e-12

# case labels for the coupling row at an interior knot, keyed by
# (left interval sloped, right interval sloped)
CASES = {(True, True): 1, (False, True): 2, (True, False): 3, (False, False): 4}


@dataclass(frozen=True)
class PWLSystem:
    """Coupling rows ``C_P[k+1] - C_P[k] - c[k] C_Q = r[k]`` plus the outlet row.

    Row ``k < N-1`` belongs to knot ``x_{k+1}``; row ``N-1`` is the outlet
    condition written as ``-C_P[N-1] - c[N-1] C_Q = r[N-1]``.
    """

    profile: PiecewiseLinear
    bc: BoundaryConditions
    C_Q: float
    c: np.ndarray
    r: np.ndarray
    flat: np.ndarray
    cases: np.ndarray

    @property
    def N(self):
        return self.flat.size

    def dense_matrix(self):
        """The (N+1) x (N+1) matrix for x = [C_Q, C_P[0], ..., C_P[N-1]]."""
        N = self.N
        M = np.zeros((N + 1, N + 1))
        M[0, 0] = 1.0
        for k in range(N):
            M[k + 1, 0] = -self.c[k]
            M[k + 1, k + 1] = -1.0
            if k + 1 < N:
                M[k + 1, k + 2] = 1.0
        return M

    def rhs(self):
        return np.concatenate(([self.C_Q], self.r))


@dataclass(frozen=True)
class PWLSolution:
    C_Q: float
    C_P: np.ndarray


def _as_linear(profile):
    if isinstance(profile, PiecewiseLinear):
        return profile
    if isinstance(profile, PiecewiseConstant):
        return profile.to_linear()
    raise ValidationError("the PWL solver needs a piecewise profile (see sample_pwl)")


def _flat_mask(profile, rtol):
    scale = max(float(np.max(profile.start)), float(np.max(profile.end)))
    return np.abs(profile.end - profile.start) <= rtol * scale


def _end_terms(a, b, w, m, flat):
    """Shape values p - C_P at both ends of each interval.

    Each value is split as ``q * C_Q + u * 6 eta U``; returns
    ``(q_left, u_left, q_right, u_right)``.
    """
    safe_m = np.where(flat, 1.0, m)
    q_l = np.where(flat, 0.0, -0.5 / (a * a * safe_m))
    u_l = np.where(flat, 0.0, -1.0 / (a * safe_m))
    q_r = np.where(flat, w / b ** 3, -0.5 / (b * b * safe_m))
    u_r = np.where(flat, w / b ** 2, -1.0 / (b * safe_m))
    return q_l, u_l, q_r, u_r


def assemble_pwl(profile, bc: BoundaryConditions, zero_slope_rtol=ZERO_SLOPE_RTOL) -> PWLSystem:
    profile = _as_linear(profile)
    bc = resolve_flux(profile, bc)
    a, b, w = profile.start, profile.end, profile.widths
    flat = _flat_mask(profile, zero_slope_rtol)
    m = (b - a) / w
    q_l, u_l, q_r, u_r = _end_terms(a, b, w, m, flat)
    six_eta_u = 6.0 * bc.eta * bc.U

    # knot x_{k+1}: C_P[k+1] + left[k+1] = C_P[k] + right[k]
    c = np.empty(a.size)
    r = np.empty(a.size)
    c[:-1] = q_r[:-1] - q_l[1:]
    r[:-1] = six_eta_u * (u_r[:-1] - u_l[1:])
    # outlet: C_P[N-1] + right[N-1] = P_N
    c[-1] = q_r[-1]
    r[-1] = six_eta_u * u_r[-1] - bc.P_N
    cases = np.array([CASES[(not flat[k], not flat[k + 1])] for k in range(a.size - 1)], dtype=int)
    return PWLSystem(profile, bc, -12.0 * bc.eta * bc.Q, c, r, flat, cases)


def solve_pwl(system: PWLSystem, backend=None) -> PWLSolution:
    """C_Q is read off directly; C_P comes from one backward partial sum."""
    C_P = kernels.backward_sum(-system.c, system.r, system.C_Q, backend=backend)
    return PWLSolution(system.C_Q, C_P)


class PWLPressure(PressureSolution):
    """Closed-form piecewise pressure for a piecewise-linear height."""

    method = "pwl"

    def __init__(self, system: PWLSystem, solution: PWLSolution):
        prof = system.profile
        self.system = system
        self.C_Q = solution.C_Q
        self.C_P = np.asarray(solution.C_P, dtype=float)
        self._six_eta_u = 6.0 * system.bc.eta * system.bc.U
        self._slopes = np.where(system.flat, 0.0, prof.slopes)
        self.profile = prof
        values = np.empty(prof.knots.size)
        values[:-1] = self._shape(np.arange(prof.n_components), prof.knots[:-1], prof.start) + self.C_P
        values[-1] = system.bc.P_N
        super().__init__(prof, system.bc, prof.knots, values)

    def _shape(self, k, x, h):
        flat = self.system.flat[k]
        m = np.where(flat, 1.0, self._slopes[k])
        sloped = -(0.5 * self.C_Q / (h * h) + self._six_eta_u / h) / m
        level = (self.C_Q / h ** 3 + self._six_eta_u / (h * h)) * (x - self.profile.knots[k])
        return np.where(flat, level, sloped)

    def _height(self, k, x):
        prof = self.profile
        t = (x - prof.knots[k]) / prof.widths[k]
        return (1.0 - t) * prof.start[k] + t * prof.end[k]

    def __call__(self, x, side="right"):
        x = self._locate(x)
        k = self.interval_index(x, side)
        p = self._shape(k, x, self._height(k, x)) + self.C_P[k]
        # knot values are stored exactly (the outlet equals P_N)
        hit = x == self.knots[k + 1]
        p = np.where(hit, self.values[k + 1], p)
        return float(p) if np.ndim(p) == 0 else p

    def dpdx(self, x, side="right"):
        x = self._locate(x)
        k = self.interval_index(x, side)
        h = self._height(k, x)
        g = self.C_Q / h ** 3 + self._six_eta_u / (h * h)
        return float(g) if np.ndim(g) == 0 else g

    def d2pdx2(self, x, side="right"):
        x = self._locate(x)
        k = self.interval_index(x, side)
        h = self._height(k, x)
        g2 = -(3.0 * self.C_Q / h ** 4 + 2.0 * self._six_eta_u / h ** 3) * self._slopes[k]
        return float(g2) if np.ndim(g2) == 0 else g2


def eval_pressure_pwl(solution: PWLSolution, profile, bc, x, zero_slope_rtol=ZERO_SLOPE_RTOL):
    """Evaluate the closed form for given constants (re-deriving the case split)."""
    system = assemble_pwl(profile, bc, zero_slope_rtol)
    return PWLPressure(system, solution)(x)


def pwl_pressure(profile, bc: BoundaryConditions, zero_slope_rtol=ZERO_SLOPE_RTOL,
                 backend=None) -> PWLPressure:
    """Assemble, solve and wrap as a :class:`PressureSolution`."""
    system = assemble_pwl(profile, bc, zero_slope_rtol)
    return PWLPressure(system, solve_pwl(system, backend=backend))
