"""Exact Reynolds solution for piecewise-constant film heights.

On each interval the pressure is linear.  The unknowns are the N interval
gradients followed by the N-1 interior knot pressures; they satisfy a block
system

    M = [[I, B],
         [C, 0]]

whose Schur complement ``K = -C B`` is symmetric tridiagonal.  ``K^-1`` is
never formed densely: two O(N) recursions give element-wise access and the
solve applies it element by element, which costs O(N^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import BoundaryConditions, LinearPressure
from .errors import SingularMatrix, TooFewComponents, ValidationError
from .geometry import PiecewiseConstant, PiecewiseLinear

# pivots below this fraction of max |alpha| are reported as singular
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class TridiagInverse:
    """Element-wise description of the inverse of a symmetric tridiagonal K.

    ``S`` is the backward sequence, ``T`` its partial products and ``d`` the
    diagonal of ``K^-1``; for ``i < j``, ``K^-1[i, j] = d[i] * T[j-1] / T[i-1]``.
    """

    S: np.ndarray
    T: np.ndarray
    d: np.ndarray

    @property
    def n(self):
        return self.d.size

    @property
    def ratios_safe(self):
        if self.T.size == 0:
            return True
        a = np.abs(self.T)
        return a.min() >= kernels.T_SAFE and a.max() <= 1.0 / kernels.T_SAFE

    def element(self, i, j):
        if i > j:
            i, j = j, i
        if i == j:
            return float(self.d[i])
        if self.ratios_safe:
            t_lo = self.T[i - 1] if i > 0 else 1.0
            return float(self.d[i] * self.T[j - 1] / t_lo)
        return float(self.d[i] * np.prod(self.S[i:j]))

    def column(self, j):
        """Column ``j`` of ``K^-1`` in O(n), from running products only."""
        n = self.n
        out = np.empty(n)
        out[j] = self.d[j]
        if j + 1 < n:
            # below the diagonal: K^-1[i, j] = d_j * prod(S[j:i])
            out[j + 1:] = self.d[j] * np.cumprod(self.S[j:])
        if j > 0:
            # above: K^-1[i, j] = d_i * prod(S[i:j])
            out[:j] = self.d[:j] * np.cumprod(self.S[:j][::-1])[::-1]
        return out

    def dense(self):
        n = self.n
        return np.column_stack([self.column(j) for j in range(n)]) if n else np.empty((0, 0))

    def matvec(self, rhs, backend=None):
        return kernels.inverse_apply(self.S, self.T, self.d, rhs, backend=backend)


def tridiag_inverse(alpha, beta, backend=None, excess=None) -> TridiagInverse:
    """Recursions for the inverse of the symmetric tridiagonal (alpha, beta).

    ``excess`` (optional) is the diagonal dominance of each row,
    ``-alpha_i - beta_{i-1} - beta_i >= 0``, known exactly by the caller.
    With it the recursions avoid cancellation entirely (see
    :func:`lubrication.kernels.dominant_recursions`); without it the plain
    recursions are used and any sign pattern is accepted.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise ValidationError("alpha must be a non-empty vector")
    if beta.shape != (alpha.size - 1,):
        raise ValidationError("beta must have one entry fewer than alpha")
    if excess is not None:
        excess = np.asarray(excess, dtype=float)
        if excess.shape != alpha.shape or np.any(excess < 0) or np.any(beta <= 0):
            raise ValidationError("excess needs one non-negative entry per row and beta > 0")
        implied = excess + np.concatenate(([0.0], beta)) + np.concatenate((beta, [0.0]))
        if not np.allclose(-alpha, implied, rtol=1e-12, atol=0):
            raise ValidationError("alpha is inconsistent with beta and excess")
        S, d, bad = kernels.dominant_recursions(beta, excess, backend=backend)
    else:
        guard = SINGULAR_RTOL * float(np.max(np.abs(alpha)))
        S, d, bad = kernels.tridiag_recursions(alpha, beta, guard, backend=backend)
    if bad >= 0:
        raise SingularMatrix(f"zero pivot in tridiagonal recursion at row {bad}")
    return TridiagInverse(S, kernels.partial_products(S), d)


@dataclass(frozen=True)
class PWCSystem:
    """Assembled block system for N piecewise-constant components.

    ``b`` stacks the upper block (length N) and lower block (length N-1);
    ``alpha``/``beta`` are the diagonal and off-diagonal of ``K = -C B``.
    In Dirichlet mode the first upper row couples to ``p_1`` and carries
    the inlet pressure, so ``alpha[0]`` gains the ``h_0^3 / dx_0`` term.
    """

    profile: PiecewiseConstant
    bc: BoundaryConditions
    dx: np.ndarray
    h: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    excess: np.ndarray

    @property
    def N(self):
        return self.h.size

    @property
    def size(self):
        return 2 * self.N - 1

    @property
    def dirichlet(self):
        return self.bc.is_dirichlet

    @property
    def upper_rhs(self):
        return self.b[:self.N]

    @property
    def lower_rhs(self):
        return self.b[self.N:]

    def blocks(self):
        """Dense ``B`` (N x N-1) and ``C`` (N-1 x N)."""
        N, dx, h3 = self.N, self.dx, self.h ** 3
        B = np.zeros((N, N - 1))
        for k in range(1, N):
            B[k, k - 1] = 1.0 / dx[k]
        for k in range(0, N - 1):
            if k > 0 or self.dirichlet:
                B[k, k] = -1.0 / dx[k]
        C = np.zeros((N - 1, N))
        for k in range(N - 1):
            C[k, k] = -h3[k]
            C[k, k + 1] = h3[k + 1]
        return B, C

    def dense_matrix(self):
        N = self.N
        B, C = self.blocks()
        M = np.zeros((2 * N - 1, 2 * N - 1))
        M[:N, :N] = np.eye(N)
        M[:N, N:] = B
        M[N:, :N] = C
        return M

    def schur_dense(self):
        n = self.N - 1
        K = np.diag(self.alpha)
        if n > 1:
            K += np.diag(self.beta, 1) + np.diag(self.beta, -1)
        return K


def _as_constant(profile):
    if isinstance(profile, PiecewiseConstant):
        return profile
    if isinstance(profile, PiecewiseLinear) and np.array_equal(profile.start, profile.end):
        return PiecewiseConstant(profile.knots, profile.start)
    raise ValidationError("the PWC solver needs a piecewise-constant profile (see sample_pwc)")


def assemble_pwc(profile, bc: BoundaryConditions) -> PWCSystem:
    profile = _as_constant(profile)
    N = profile.n_components
    if N < 2:
        raise TooFewComponents("the block system needs N >= 2 components; N = 1 is closed form")
    dx = profile.widths
    h = profile.values
    eta, U = bc.eta, bc.U
    w = h ** 3 / dx

    upper = np.zeros(N)
    if bc.is_dirichlet:
        upper[0] = -bc.P_0 / dx[0]
    else:
        upper[0] = -12.0 * eta * (bc.Q / h[0] ** 3 - 0.5 * U / h[0] ** 2)
    upper[N - 1] += bc.P_N / dx[N - 1]
    lower = 6.0 * eta * U * (h[1:] - h[:-1])

    alpha = -(w[:-1] + w[1:])
    # row dominance of -K: only the rows next to a fixed pressure exceed
    # their off-diagonal sum
    excess = np.zeros(N - 1)
    excess[-1] += w[-1]
    if bc.is_dirichlet:
        excess[0] += w[0]
    else:
        # the flux row carries no pressure, so K[0, 0] loses h_0^3/dx_0
        alpha[0] = -w[1]
    beta = w[1:-1].copy()
    return PWCSystem(profile, bc, dx, h, np.concatenate([upper, lower]), alpha, beta, excess)


def solve_pwc(system: PWCSystem, backend=None) -> LinearPressure:
    N, dx, h = system.N, system.dx, system.h
    bc = system.bc
    upper, lower = system.upper_rhs, system.lower_rhs
    inv = tridiag_inverse(system.alpha, system.beta, backend=backend, excess=system.excess)

    # -K^-1 C only matters on the two nonzero entries of the upper rhs
    first = inv.column(0) * h[0] ** 3
    last = -inv.column(N - 2) * h[N - 1] ** 3
    p_inner = first * upper[0] + last * upper[N - 1] + inv.matvec(lower, backend=backend)

    p = np.empty(N + 1)
    p[1:N] = p_inner
    p[N] = bc.P_N
    g = np.empty(N)
    g[1:] = (p[2:] - p[1:N]) / dx[1:]
    if bc.is_dirichlet:
        p[0] = bc.P_0
        g[0] = (p[1] - p[0]) / dx[0]
        Q = -(h[0] ** 3 * g[0] - 6.0 * bc.eta * bc.U * h[0]) / (12.0 * bc.eta)
        bc = bc.with_flux(Q)
    else:
        g[0] = upper[0]
        p[0] = p[1] - dx[0] * g[0]
    return LinearPressure(system.profile, bc, system.profile.knots, p, "pwc", gradients=g)


def _solve_single(profile, bc):
    h, dx = float(profile.values[0]), float(profile.widths[0])
    eta, U = bc.eta, bc.U
    if bc.is_dirichlet:
        g = (bc.P_N - bc.P_0) / dx
        bc = bc.with_flux(-(h ** 3 * g - 6.0 * eta * U * h) / (12.0 * eta))
    else:
        g = -12.0 * eta * (bc.Q / h ** 3 - 0.5 * U / h ** 2)
    p = np.array([bc.P_N - g * dx, bc.P_N])
    return LinearPressure(profile, bc, profile.knots, p, "pwc", gradients=[g])


def pwc_pressure(profile, bc: BoundaryConditions, backend=None) -> LinearPressure:
    """Assemble and solve; a single component is solved in closed form."""
    profile = _as_constant(profile)
    if profile.n_components == 1:
        return _solve_single(profile, bc)
    return solve_pwc(assemble_pwc(profile, bc), backend=backend)
