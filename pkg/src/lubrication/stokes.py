"""Two-dimensional Stokes flow (Re = 0) through the stream function.

The stream function satisfies the biharmonic equation on a uniform grid of
spacing ``delta``; the surface ``y = h(x)`` is approximated by a staircase of
grid nodes.  Boundary data:

* lower wall ``y = 0``: ``psi = 0`` and ``d psi/dy = U``;
* upper surface (staircase nodes): ``psi = Q`` and zero velocity;
* inlet column: the fully developed lubrication profile;
* outlet column: ``d psi/dx = 0`` by a one-sided second-order difference.

The 13-point stencil reaches two nodes past a wall; those ghost values come
from the cubic through the wall value, the wall-normal derivative and two
interior values.  The closure is exact for cubic profiles, so Poiseuille
and Couette flow are reproduced to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .core import BoundaryConditions, resolve_flux
from .errors import (DivergedResidual, MaxIterationsExceeded, NonFlatInlet, OutOfDomain,
                     SingularMatrix, SpacingMismatch, ValidationError)

# node kinds
SOLID, FLUID, LOWER, UPPER, INLET, OUTLET = 0, 1, 2, 3, 4, 5
KIND_NAMES = {SOLID: "solid", FLUID: "fluid", LOWER: "lower-wall", UPPER: "upper-surface",
              INLET: "inlet", OUTLET: "outlet"}

# inlet/outlet height gradients above this count as non-flat
FLAT_TOL = 1e-8
# relative mismatch allowed between the domain length and a whole number of cells
SPACING_RTOL = 1e-8


@dataclass(frozen=True)
class StokesConfig:
    """Solver settings; ``scheme`` is ``"direct"`` (sparse LU with defect
    correction) or ``"sor"`` (multicolour successive over-relaxation)."""

    delta: float = 1.0 / 32.0
    tol: float = 1e-10
    max_iter: int = 20000
    relaxation: float = 1.6
    scheme: str = "direct"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError("delta must be > 0")
        if not self.tol > 0:
            raise ValidationError("tol must be > 0")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError("max_iter must be a positive integer")
        if not 0 < self.relaxation < 2:
            raise ValidationError("relaxation must lie in (0, 2)")
        if self.scheme not in ("direct", "sor"):
            raise ValidationError(f"unknown scheme {self.scheme!r}")

    @classmethod
    def from_dict(cls, doc):
        known = {"delta", "tol", "max_iter", "relaxation", "scheme"}
        extra = set(doc) - known
        if extra:
            raise ValidationError(f"unknown stokes config key {sorted(extra)[0]!r}")
        return cls(**doc)

    def to_dict(self):
        return {"delta": self.delta, "tol": self.tol, "max_iter": self.max_iter,
                "relaxation": self.relaxation, "scheme": self.scheme}


@dataclass
class StokesGrid:
    """Node classification on ``x_i = x0 + i delta``, ``y_j = j delta``.

    Arrays are indexed ``[i, j]``.  ``top[i]`` is the staircase surface index
    of column ``i``; ``unknown[i, j]`` numbers the unknowns (-1 elsewhere).
    """

    profile: object
    delta: float
    x: np.ndarray
    y: np.ndarray
    top: np.ndarray
    kind: np.ndarray
    unknown: np.ndarray

    @property
    def shape(self):
        return self.kind.shape

    @property
    def n_unknowns(self):
        return int(self.unknown.max()) + 1

    @property
    def fluid(self):
        return self.kind == FLUID

    def inside(self):
        """Nodes with ``j <= top[i]`` (fluid plus the bounding walls)."""
        return np.arange(self.shape[1])[None, :] <= self.top[:, None]


@dataclass
class StokesField:
    grid: StokesGrid
    bc: BoundaryConditions
    psi: np.ndarray
    residual_history: list = field(default_factory=list)
    update_history: list = field(default_factory=list)
    converged: bool = False
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    p: np.ndarray | None = None

    @property
    def iterations(self):
        return len(self.residual_history)

    @property
    def residual(self):
        return self.residual_history[-1] if self.residual_history else float("nan")


# ---------------------------------------------------------------------------
# grid


def _whole_cells(length, delta, what):
    n = length / delta
    m = int(round(n))
    if m < 1 or abs(n - m) > SPACING_RTOL * max(1.0, n):
        raise SpacingMismatch(f"delta={delta} does not divide the {what} ({length}) into whole cells")
    return m


def build_stokes_grid(profile, delta) -> StokesGrid:
    """Staircase grid for ``profile`` with spacing ``delta``."""
    delta = float(delta)
    if not delta > 0:
        raise ValidationError("delta must be > 0")
    for x, side, name in ((profile.x0, "right", "inlet"), (profile.xN, "left", "outlet")):
        if abs(float(profile.derivative(x, side))) > FLAT_TOL:
            raise NonFlatInlet(f"{name}: height gradient must vanish at the {name}")
    nx = _whole_cells(profile.length, delta, "domain length") + 1
    x = profile.x0 + delta * np.arange(nx)
    x[-1] = profile.xN
    if profile.is_piecewise:
        h = np.minimum(profile(x, "left"), profile(x, "right"))
    else:
        h = np.asarray(profile(x), dtype=float)
    top = np.floor(h / delta + 0.5 + 1e-9).astype(np.int64)
    if np.any(top < 2):
        raise SpacingMismatch(f"delta={delta} leaves fewer than two cells across the film")
    ny = int(top.max())
    y = delta * np.arange(ny + 1)

    kind = np.zeros((nx, ny + 1), dtype=np.int8)
    jj = np.arange(ny + 1)[None, :]
    below = (jj > 0) & (jj < top[:, None])
    kind[1:-1][below[1:-1]] = FLUID
    # walls: the surface node of every column plus solid nodes touching fluid
    kind[jj.repeat(nx, 0) == top[:, None]] = UPPER
    fl = kind == FLUID
    touch = np.zeros_like(fl)
    padded = np.pad(fl, 1)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            touch |= padded[1 + di:1 + di + nx, 1 + dj:1 + dj + ny + 1]
    kind[(kind == SOLID) & touch & (jj > top[:, None])] = UPPER
    kind[0, 1:top[0]] = INLET
    kind[-1, 1:top[-1]] = OUTLET
    kind[:, 0] = LOWER
    kind[0, top[0]] = UPPER
    kind[-1, top[-1]] = UPPER

    unknown = -np.ones(kind.shape, dtype=np.int64)
    mask = (kind == FLUID) | (kind == OUTLET)
    unknown[mask] = np.arange(int(mask.sum()))
    return StokesGrid(profile, delta, x, y, top, kind, unknown)


def inlet_stream(bc: BoundaryConditions, h0, y):
    """Stream function of the fully developed lubrication profile."""
    y = np.asarray(y, dtype=float)
    h0 = float(h0)
    tol = 1e-12 * max(1.0, h0)
    if np.any(y < -tol) or np.any(y > h0 + tol):
        raise OutOfDomain("inlet profile needs 0 <= y <= h0")
    psi = bc.Q * y * y * (3.0 * h0 - 2.0 * y) / h0 ** 3 + bc.U * y * (h0 - y) ** 2 / h0 ** 2
    return float(psi) if psi.ndim == 0 else psi


def _known_values(grid, bc):
    psi = np.zeros(grid.shape)
    psi[grid.kind == UPPER] = bc.Q
    inlet = grid.kind[0] == INLET
    psi[0, inlet] = inlet_stream(bc, grid.top[0] * grid.delta, grid.y[inlet])
    return psi


# ---------------------------------------------------------------------------
# discrete biharmonic system


def _assemble(grid, bc):
    """Sparse matrix and rhs for the unknown nodes (rows scaled by delta^4)."""
    kind, unk, delta = grid.kind, grid.unknown, grid.delta
    nx, ny1 = grid.shape
    known = _known_values(grid, bc)
    n = grid.n_unknowns
    b = np.zeros(n)
    rows, cols, vals = [], [], []

    def add(r, ti, tj, coef):
        coef = np.broadcast_to(np.asarray(coef, dtype=float), r.shape)
        if r.size == 0:
            return
        if np.any((ti < 0) | (ti >= nx) | (tj < 0) | (tj >= ny1)):
            raise ValidationError("stencil left the grid; the geometry is too thin for this spacing")
        target = unk[ti, tj]
        is_unknown = target >= 0
        if np.any(~is_unknown & (kind[ti, tj] == SOLID)):
            raise ValidationError("stencil reached a solid node; the geometry is too thin for this spacing")
        rows.append(r[is_unknown])
        cols.append(target[is_unknown])
        vals.append(coef[is_unknown])
        np.subtract.at(b, r[~is_unknown], coef[~is_unknown] * known[ti[~is_unknown], tj[~is_unknown]])

    I, J = np.nonzero(kind == FLUID)
    R = unk[I, J]
    add(R, I, J, 20.0)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        add(R, I + di, J + dj, -8.0)
    for di, dj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        add(R, I + di, J + dj, 2.0)

    U = bc.U
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        i1, j1 = I + di, J + dj
        k1 = kind[i1, j1]
        direct = k1 == FLUID
        add(R[direct], I[direct] + 2 * di, J[direct] + 2 * dj, 1.0)
        g = ~direct
        if not np.any(g):
            continue
        # cubic ghost: psi(n1 + d) = -1.5 psi(n1) + 3 psi(c) - 0.5 psi(c - d) + 3 delta (grad psi . d)
        r, ic, jc, ia, ja = R[g], I[g], J[g], i1[g], j1[g]
        add(r, ia, ja, -1.5)
        add(r, ic, jc, 3.0)
        add(r, ic - di, jc - dj, -0.5)
        slope = np.where(kind[ia, ja] == LOWER, U * dj, 0.0)
        b[r] -= 3.0 * delta * slope

    # outlet rows: (3 psi_N - 4 psi_{N-1} + psi_{N-2}) = 0
    jo = np.nonzero(kind[-1] == OUTLET)[0]
    ro = unk[-1, jo]
    io = np.full(jo.size, nx - 1)
    if np.any(kind[nx - 3, jo] == SOLID):
        raise NonFlatInlet("outlet: the flat outlet region is shorter than two cells")
    add(ro, io, jo, 3.0)
    add(ro, io - 1, jo, -4.0)
    add(ro, io - 2, jo, 1.0)

    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    A.sum_duplicates()
    return A, b, known


def _colors(grid):
    I, J = np.nonzero(grid.unknown >= 0)
    order = np.argsort(grid.unknown[I, J])
    return ((I[order] % 3) * 3 + (J[order] % 3)).astype(np.int64)


def _field_from_vector(grid, known, sol):
    psi = known.copy()
    mask = grid.unknown >= 0
    psi[mask] = sol[grid.unknown[mask]]
    psi[grid.kind == SOLID] = np.nan
    return psi


def iterate_biharmonic(grid: StokesGrid, bc: BoundaryConditions, tol=1e-10, max_iter=20000,
                       relaxation=1.6, scheme="direct", backend=None) -> StokesField:
    """Solve the discrete biharmonic problem iteratively.

    Stops when both the relative update and the relative residual (infinity
    norms) are <= ``tol``.  Raises :class:`MaxIterationsExceeded` (carrying the
    last iterate and its residual history) or :class:`DivergedResidual`.
    """
    if bc.is_dirichlet:
        raise ValidationError("the Stokes solver needs the flux Q; convert Dirichlet data first")
    A, b, known = _assemble(grid, bc)
    bnorm = max(float(np.max(np.abs(b))) if b.size else 0.0, 1e-300)
    x = np.zeros(A.shape[0])
    res_hist, upd_hist = [], []

    if scheme == "direct":
        try:
            lu = splu(A.tocsc())
        except RuntimeError as exc:
            raise SingularMatrix(f"biharmonic system is singular: {exc}") from None

        def step():
            dx = lu.solve(b - A @ x)
            x[:] += dx
            return float(np.max(np.abs(dx)))
    elif scheme == "sor":
        sweeper = kernels.SORSweeper(A, _colors(grid), backend=backend)

        def step():
            return sweeper.sweep(x, b, relaxation)
    else:
        raise ValidationError(f"unknown scheme {scheme!r}")

    first = None
    for _ in range(int(max_iter)):
        change = step()
        res = float(np.max(np.abs(b - A @ x))) / bnorm
        scale = max(float(np.max(np.abs(x))), abs(bc.Q), abs(bc.U) * grid.delta, 1e-300)
        upd = change / scale
        res_hist.append(res)
        upd_hist.append(upd)
        if not np.isfinite(res):
            raise DivergedResidual("residual became non-finite")
        first = res if first is None else first
        if res > 1e8 * max(first, 1.0):
            raise DivergedResidual(f"residual grew to {res:.3e}")
        if res <= tol and upd <= tol:
            psi = _field_from_vector(grid, known, x)
            return StokesField(grid, bc, psi, res_hist, upd_hist, converged=True)
    psi = _field_from_vector(grid, known, x)
    fld = StokesField(grid, bc, psi, res_hist, upd_hist, converged=False)
    raise MaxIterationsExceeded(
        f"no convergence after {max_iter} iterations (residual {res_hist[-1]:.3e})", field=fld)


# ---------------------------------------------------------------------------
# derivatives along grid lines


_WEIGHTS = {}


def _fd_weights(offsets, order):
    key = (offsets, order)
    w = _WEIGHTS.get(key)
    if w is None:
        off = np.asarray(offsets, dtype=float)
        m = off.size
        V = np.vander(off, m, increasing=True).T
        rhs = np.zeros(m)
        rhs[order] = float(np.prod(np.arange(1, order + 1)))
        w = np.linalg.solve(V, rhs)
        _WEIGHTS[key] = w
    return w


def _diff_run(f, order, delta, npts=5):
    """Derivative of samples ``f`` along a run using sliding windows.

    Each point uses the ``npts`` nearest samples (centred where possible);
    windows shrink when the run is shorter.
    """
    n = f.size
    out = np.zeros(n)
    m = min(npts, n)
    if m <= order:
        return out
    k = np.arange(n)
    start = np.clip(k - m // 2, 0, n - m)
    rel = k - start
    for r in np.unique(rel):
        sel = k[rel == r]
        w = _fd_weights(tuple(range(-int(r), m - int(r))), order)
        acc = np.zeros(sel.size)
        for t, wt in enumerate(w):
            acc += wt * f[sel - r + t]
        out[sel] = acc / delta ** order
    return out


def _runs(valid):
    """Maximal runs ``(start, stop)`` of True values in a 1D mask."""
    v = np.concatenate(([False], valid, [False]))
    d = np.diff(v.astype(np.int8))
    return list(zip(np.nonzero(d == 1)[0], np.nonzero(d == -1)[0]))


def _line_derivative(values, valid, axis, order, delta, npts=5):
    out = np.full(values.shape, np.nan)
    vals = values if axis == 0 else values.T
    ok = valid if axis == 0 else valid.T
    res = out if axis == 0 else out.T
    for line in range(vals.shape[1]):
        for a, z in _runs(ok[:, line]):
            res[a:z, line] = _diff_run(vals[a:z, line], order, delta, npts)
    return out


def _row_valid(grid):
    """Nodes usable for x-derivatives: the inside region plus side walls."""
    inside = grid.inside()
    return inside | (grid.kind == UPPER)


def recover_velocity(fld: StokesField):
    """``u = d psi/dy`` and ``v = -d psi/dx`` with cubic-exact windows.

    Wall nodes take their boundary values exactly; the inlet column takes
    the prescribed profile.
    """
    grid, bc = fld.grid, fld.bc
    inside = grid.inside()
    psi = np.where(np.isnan(fld.psi), 0.0, fld.psi)
    u = _line_derivative(psi, inside, 1, 1, grid.delta)
    v = -_line_derivative(psi, _row_valid(grid), 0, 1, grid.delta)
    kind = grid.kind
    walls = (kind == UPPER)
    u[walls] = 0.0
    v[walls] = 0.0
    u[kind == LOWER] = bc.U
    v[kind == LOWER] = 0.0
    h0 = grid.top[0] * grid.delta
    inlet = kind[0] == INLET
    yi = grid.y[inlet]
    u[0, inlet] = 6.0 * bc.Q * yi * (h0 - yi) / h0 ** 3 + bc.U * (h0 - yi) * (h0 - 3.0 * yi) / h0 ** 2
    v[0, inlet] = 0.0
    u[~inside & ~walls] = np.nan
    v[~inside & ~walls] = np.nan
    fld.u, fld.v = u, v
    return u, v


def recover_pressure(fld: StokesField, bc: BoundaryConditions | None = None):
    """Pressure from the Stokes momentum equations by a path integral.

    ``p_x = eta lap(u)`` is integrated (trapezoid) along the lower wall from
    the outlet, then ``p_y = eta lap(v)`` up each column; the result is
    shifted so that the outlet column mean equals ``P_N``.
    """
    bc = bc or fld.bc
    if fld.u is None or fld.v is None:
        recover_velocity(fld)
    grid = fld.grid
    d = grid.delta
    inside = grid.inside()
    rowv = _row_valid(grid)
    u = np.where(np.isnan(fld.u), 0.0, fld.u)
    v = np.where(np.isnan(fld.v), 0.0, fld.v)
    lap_u = (_line_derivative(u, rowv, 0, 2, d) + _line_derivative(u, inside, 1, 2, d))
    lap_v = (_line_derivative(v, rowv, 0, 2, d) + _line_derivative(v, inside, 1, 2, d))
    px = bc.eta * lap_u[:, 0]
    py = bc.eta * lap_v

    nx = grid.shape[0]
    p = np.full(grid.shape, np.nan)
    wall = np.zeros(nx)
    wall[:-1] = -np.cumsum((0.5 * d * (px[:-1] + px[1:]))[::-1])[::-1]
    for i in range(nx):
        t = grid.top[i]
        col = py[i, :t + 1]
        p[i, :t + 1] = wall[i] + np.concatenate(([0.0], np.cumsum(0.5 * d * (col[:-1] + col[1:]))))
    p += bc.P_N - np.mean(p[-1, :grid.top[-1] + 1])
    fld.p = p
    return p


def solve_stokes(profile, bc: BoundaryConditions, config: StokesConfig | None = None,
                 backend=None) -> StokesField:
    """Grid, stream function, velocity and pressure in one call."""
    config = config or StokesConfig()
    if bc.is_dirichlet:
        if not profile.is_piecewise:
            raise ValidationError("Dirichlet data on an analytic height: give Q for the Stokes solver")
        bc = resolve_flux(profile, bc)
    grid = build_stokes_grid(profile, config.delta)
    fld = iterate_biharmonic(grid, bc, config.tol, config.max_iter, config.relaxation,
                             config.scheme, backend=backend)
    recover_velocity(fld)
    recover_pressure(fld, bc)
    return fld


# ---------------------------------------------------------------------------
# diagnostics


def column_flux(fld: StokesField):
    """Trapezoid integral of ``u`` over each column's film."""
    grid = fld.grid
    out = np.empty(grid.shape[0])
    for i in range(grid.shape[0]):
        t = grid.top[i]
        out[i] = np.trapezoid(fld.u[i, :t + 1], dx=grid.delta) if hasattr(np, "trapezoid") \
            else np.trapz(fld.u[i, :t + 1], dx=grid.delta)
    return out


def stokes_pressure_drop(fld: StokesField):
    """``p(x_N, 0) - p(x_0, 0)`` along the lower wall."""
    return float(fld.p[-1, 0] - fld.p[0, 0])


def cross_film_variation(fld: StokesField):
    """``max_x (max_y p - min_y p)`` over each column's film."""
    spans = [np.ptp(fld.p[i, :fld.grid.top[i] + 1]) for i in range(fld.grid.shape[0])]
    return float(np.max(spans))


def stream_excursion(fld: StokesField):
    """How far psi leaves ``[0, Q]`` (below the wall value, above the surface value)."""
    psi = fld.psi[fld.grid.inside()]
    lo, hi = min(0.0, fld.bc.Q), max(0.0, fld.bc.Q)
    return float(max(lo - np.nanmin(psi), 0.0)), float(max(np.nanmax(psi) - hi, 0.0))
