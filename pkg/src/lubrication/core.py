"""Lubrication-theory quantities shared by every Reynolds solver.

Pressure solutions from all three solvers expose the same small interface
(:class:`PressureSolution`): pointwise pressure, one-sided first and second
derivatives, and the boundary data they were computed with.  Velocities and
flux are reconstructed from that interface, so they work for any backend.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import AtKnot, OutOfDomain, ValidationError
from .geometry import as_piecewise_linear


@dataclass(frozen=True)
class BoundaryConditions:
    """Pressure boundary data.

    Give either the flux ``Q`` (mixed flux/outlet-pressure mode) or the inlet
    pressure ``P_0`` (Dirichlet pressure-drop mode), never both.
    """

    Q: float | None = None
    P_N: float = 0.0
    U: float = 0.0
    eta: float = 1.0
    P_0: float | None = None

    def __post_init__(self):
        if (self.Q is None) == (self.P_0 is None):
            raise ValidationError("exactly one of Q or P_0 must be given")
        for name in ("P_N", "U", "eta"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.eta <= 0:
            raise ValidationError("eta must be > 0")
        if self.Q is not None and not math.isfinite(self.Q):
            raise ValidationError("Q must be finite")
        if self.P_0 is not None and not math.isfinite(self.P_0):
            raise ValidationError("P_0 must be finite")

    @property
    def mode(self):
        return "flux" if self.Q is not None else "dirichlet"

    @property
    def is_dirichlet(self):
        return self.P_0 is not None

    def with_flux(self, Q):
        return replace(self, Q=float(Q), P_0=None)

    def scaled_viscosity(self, factor):
        return replace(self, eta=self.eta * factor)


@dataclass(frozen=True)
class LubricationRegime:
    """Characteristic scales; diagnostics only, never used to gate a solve."""

    L_x: float
    L_y: float
    Q: float
    eta: float = 1.0
    rho: float = 1.0

    @classmethod
    def from_profile(cls, profile, Q, eta=1.0, rho=1.0, n=2001):
        x = np.linspace(profile.x0, profile.xN, n)
        if profile.is_piecewise:
            x = np.union1d(x, profile.knots)
            L_y = max(np.max(profile(x, "left")), np.max(profile(x, "right")))
        else:
            L_y = float(np.max(profile(x)))
        return cls(profile.length, float(L_y), float(Q), eta, rho)

    @property
    def epsilon(self):
        return self.L_y / self.L_x

    @property
    def U_star(self):
        return self.Q / self.L_y

    @property
    def V_star(self):
        return self.Q / self.L_x

    @property
    def reynolds(self):
        return self.rho * self.U_star * self.L_x / self.eta

    @property
    def scaled_reynolds(self):
        return self.epsilon ** 2 * self.reynolds


# ---------------------------------------------------------------------------
# exact height integrals


def interval_integrals(start, end, widths):
    """Integrals of h^-3 and h^-2 over linear segments.

    Written without dividing by the slope, so the same expressions hold for
    flat segments and stay accurate for nearly flat ones.
    """
    a = np.asarray(start, dtype=float)
    b = np.asarray(end, dtype=float)
    w = np.asarray(widths, dtype=float)
    i3 = w * (a + b) / (2.0 * a * a * b * b)
    i2 = w / (a * b)
    return i3, i2


def _height_integrals(profile):
    if not profile.is_piecewise:
        raise ValidationError(
            "pressure drop needs a piecewise profile; sample analytic heights first")
    lin = as_piecewise_linear(profile)
    i3, i2 = interval_integrals(lin.start, lin.end, lin.widths)
    return float(np.sum(i3)), float(np.sum(i2))


def pressure_drop(profile, bc):
    """p(x_N) - p(x_0) for a piecewise profile, from the exact integrals."""
    if bc.is_dirichlet:
        return bc.P_N - bc.P_0
    i3, i2 = _height_integrals(profile)
    return -12.0 * bc.eta * bc.Q * i3 + 6.0 * bc.eta * bc.U * i2


def dirichlet_to_flux(profile, P_0, P_N, U=0.0, eta=1.0):
    """Flux that produces the pressure drop ``P_N - P_0``."""
    i3, i2 = _height_integrals(profile)
    return (6.0 * eta * U * i2 - (P_N - P_0)) / (12.0 * eta * i3)


def resolve_flux(profile, bc):
    """Flux-mode copy of ``bc`` (Dirichlet data converted through the exact drop)."""
    if not bc.is_dirichlet:
        return bc
    return bc.with_flux(dirichlet_to_flux(profile, bc.P_0, bc.P_N, bc.U, bc.eta))


# ---------------------------------------------------------------------------
# pressure solutions


class PressureSolution:
    """Pressure p(x) on ``[x_0, x_N]`` with knot values ``values``."""

    method = "abstract"

    def __init__(self, profile, bc, knots, values):
        self.profile = profile
        self.bc = bc
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.knots.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def x0(self):
        return float(self.knots[0])

    @property
    def xN(self):
        return float(self.knots[-1])

    @property
    def flux(self):
        return self.bc.Q

    @property
    def delta_p(self):
        return float(self.values[-1] - self.values[0])

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.x0), abs(self.xN))
        if np.any(x < self.x0 - tol) or np.any(x > self.xN + tol):
            raise OutOfDomain(f"x outside [{self.x0}, {self.xN}]")
        return np.clip(x, self.x0, self.xN)

    def interval_index(self, x, side="right"):
        x = self._locate(x)
        n = self.knots.size - 1
        s = "right" if side == "right" else "left"
        return np.clip(np.searchsorted(self.knots, x, side=s) - 1, 0, n - 1)

    def at_knot(self, x):
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.x0), abs(self.xN))
        k = np.clip(np.searchsorted(self.knots, x), 0, self.knots.size - 1)
        km = np.clip(k - 1, 0, self.knots.size - 1)
        return (np.abs(self.knots[k] - x) <= tol) | (np.abs(self.knots[km] - x) <= tol)

    def __call__(self, x):
        raise NotImplementedError

    def dpdx(self, x, side="right"):
        raise NotImplementedError

    def d2pdx2(self, x, side="right"):
        raise NotImplementedError


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


class LinearPressure(PressureSolution):
    """Pressure linear between knots (PWC and finite-difference solutions)."""

    def __init__(self, profile, bc, knots, values, method, gradients=None):
        super().__init__(profile, bc, knots, values)
        self.method = method
        if gradients is None:
            gradients = np.diff(self.values) / np.diff(self.knots)
        self.gradients = np.asarray(gradients, dtype=float)

    def __call__(self, x):
        return _scalar(np.interp(self._locate(x), self.knots, self.values))

    def dpdx(self, x, side="right"):
        return _scalar(self.gradients[self.interval_index(x, side)])

    def d2pdx2(self, x, side="right"):
        return _scalar(np.zeros_like(self._locate(x)))


# ---------------------------------------------------------------------------
# velocity and flux reconstruction


def _heights(sol, x, side):
    prof = sol.profile
    return np.asarray(prof(x, side), dtype=float), np.asarray(prof.derivative(x, side), dtype=float)


def _check_y(y, h):
    tol = 1e-12 * np.maximum(1.0, h)
    if np.any(y < -tol) or np.any(y > h + tol):
        raise OutOfDomain("y must satisfy 0 <= y <= h(x)")


def velocity_u(sol, x, y, side="right"):
    """Horizontal velocity (Couette plus Poiseuille parts)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    h, _ = _heights(sol, x, side)
    _check_y(y, h)
    eta, U = sol.bc.eta, sol.bc.U
    dp = np.asarray(sol.dpdx(x, side), dtype=float)
    u = dp * (y * y - h * y) / (2.0 * eta) + U * (h - y) / h
    return _scalar(u)


def velocity_v(sol, x, y, side=None):
    """Vertical velocity from incompressibility.

    ``v`` jumps wherever h or h' jumps, so at a knot the caller must say
    which side to use.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if side is None:
        if np.any(sol.at_knot(x)):
            raise AtKnot("v is one-sided at knots; pass side='left' or 'right'")
        side = "right"
    h, dh = _heights(sol, x, side)
    _check_y(y, h)
    eta, U = sol.bc.eta, sol.bc.U
    dp = np.asarray(sol.dpdx(x, side), dtype=float)
    d2p = np.asarray(sol.d2pdx2(x, side), dtype=float)
    coeff = 0.5 * ((d2p * h + dp * dh) / (2.0 * eta) - U * dh / (h * h))
    v = -d2p * y ** 3 / (6.0 * eta) + coeff * y * y
    return _scalar(v)


def flux_at(sol, x, side="right"):
    """Volume flux through the cross-section at ``x``."""
    h = np.asarray(sol.profile(x, side), dtype=float)
    dp = np.asarray(sol.dpdx(x, side), dtype=float)
    eta, U = sol.bc.eta, sol.bc.U
    return _scalar(-(h ** 3 * dp - 6.0 * eta * U * h) / (12.0 * eta))


def pressure_gradient_from_flux(h, Q, U=0.0, eta=1.0):
    """dp/dx implied by the flux relation at height ``h``."""
    h = np.asarray(h, dtype=float)
    return (-12.0 * eta * Q + 6.0 * eta * U * h) / h ** 3


__all__ = [
    "BoundaryConditions",
    "LubricationRegime",
    "PressureSolution",
    "LinearPressure",
    "interval_integrals",
    "pressure_drop",
    "dirichlet_to_flux",
    "resolve_flux",
    "velocity_u",
    "velocity_v",
    "flux_at",
    "pressure_gradient_from_flux",
]
