"""Reference solutions, error norms, convergence and timing studies, and
Reynolds-versus-Stokes comparisons."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import BoundaryConditions, PressureSolution, pressure_drop
from .errors import GridMismatch, ValidationError
from .fd import assemble_fd, fd_pressure, solve_fd
from .geometry import GeometrySpec, build_profile, sample_pwc, sample_pwl
from .pwc import assemble_pwc, pwc_pressure, solve_pwc
from .pwl import assemble_pwl, pwl_pressure, solve_pwl
from .stokes import (StokesConfig, cross_film_variation, solve_stokes, stokes_pressure_drop,
                     stream_excursion)

METHODS = ("fd", "pwc", "pwl")
NORMS = ("l1", "l2", "linf", "dP")

# psi must leave [0, Q] by more than this fraction of |Q| to flag recirculation
RECIRCULATION_RTOL = 1e-6


# ---------------------------------------------------------------------------
# exact sinusoidal-slider solution


def sinusoid_flux(H_0, delta, U, eta=1.0):
    """Flux giving zero pressure drop over whole periods."""
    return U * eta * H_0 * (1.0 - delta ** 2) / (2.0 + delta ** 2)


def sinusoid_exact_pressure(H_0, delta, alpha, U, eta, x, convention="reynolds"):
    """Exact pressure for ``h = H_0 (1 + delta cos(alpha x))`` with zero drop.

    ``convention="reynolds"`` solves ``(h^3 p')' = 6 eta U h'`` as used by
    every solver here.  ``convention="printed"`` returns the widely quoted
    closed form, which carries the opposite sign (it corresponds to sliding
    in the -x direction).
    """
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if alpha == 0:
        raise ValidationError("alpha must be nonzero")
    x = np.asarray(x, dtype=float)
    c = np.cos(alpha * x)
    h = H_0 * (1.0 + delta * c)
    p = -6.0 * eta * U * delta * (H_0 + h) * np.sin(alpha * x) / (
        alpha * H_0 ** 3 * (2.0 + delta ** 2) * (1.0 + delta * c) ** 2)
    if convention == "reynolds":
        p = -p
    elif convention != "printed":
        raise ValidationError(f"unknown convention {convention!r}")
    return float(p) if p.ndim == 0 else p


# ---------------------------------------------------------------------------
# norms and fitted orders


def error_norms(numeric, exact, grid):
    """Discrete l1, l2 and l-infinity errors with uniform ``dx`` weighting.

    ``numeric`` is an array of values on ``grid`` or a PressureSolution whose
    knots coincide with ``grid``; ``exact`` is an array or a callable.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise GridMismatch("grid must be a non-empty vector")
    if isinstance(numeric, PressureSolution):
        if numeric.knots.shape != grid.shape or not np.allclose(numeric.knots, grid, rtol=0,
                                                                  atol=1e-12 * max(1.0, np.abs(grid).max())):
            raise GridMismatch("solution knots differ from the comparison grid")
        values = numeric.values
    else:
        values = np.asarray(numeric, dtype=float)
        if values.shape != grid.shape:
            raise GridMismatch(f"{values.size} values on a grid of {grid.size} points")
    ref = exact(grid) if callable(exact) else np.asarray(exact, dtype=float)
    if np.shape(ref) != grid.shape:
        raise GridMismatch("exact values do not match the grid")
    if grid.size > 1:
        steps = np.diff(grid)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise GridMismatch("error norms need a uniform grid")
        dx = float(steps[0])
    else:
        dx = 1.0
    e = np.abs(values - ref)
    return float(dx * e.sum()), float(math.sqrt(dx * np.sum(e * e))), float(e.max())


def fit_order(sizes, errors):
    """Least-squares slope of log(error) against log(1/N), with its residual."""
    n = np.asarray(sizes, dtype=float)
    e = np.asarray(errors, dtype=float)
    if n.size < 3:
        raise ValidationError("an order estimate needs at least three grids")
    if np.any(e <= 0):
        return float("nan"), float("nan")
    A = np.column_stack([-np.log(n), np.ones(n.size)])
    coef, res, *_ = np.linalg.lstsq(A, np.log(e), rcond=None)
    resid = float(math.sqrt(res[0] / n.size)) if res.size else 0.0
    return float(coef[0]), resid


def fit_slope(sizes, times):
    """Log-log slope of time against N (positive for growing cost)."""
    slope, resid = fit_order(sizes, times)
    return -slope, resid


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceReport:
    method: str
    geometry: dict
    reference: str
    sizes: list
    errors: dict
    orders: dict
    fit_residuals: dict

    def to_dict(self):
        return asdict(self)

    def rows(self):
        for k, n in enumerate(self.sizes):
            yield {"method": self.method, "N": n, **{m: self.errors[m][k] for m in NORMS}}


def solve_method(method, profile, bc, N, fd_method="banded", backend=None):
    """Sample ``profile`` as the method requires and solve on N intervals."""
    if method == "fd":
        return fd_pressure(profile, bc, N, method=fd_method)
    if method == "pwc":
        return pwc_pressure(sample_pwc(profile, N), bc, backend=backend)
    if method == "pwl":
        return pwl_pressure(sample_pwl(profile, N), bc, backend=backend)
    raise ValidationError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def _as_spec(spec):
    if isinstance(spec, GeometrySpec):
        return spec
    if isinstance(spec, dict):
        return GeometrySpec.from_dict(spec)
    raise ValidationError("expected a GeometrySpec")


def _reference(spec, profile, bc, ref_N):
    """(bc used by the solvers, reference callable, reference drop, label)."""
    if spec.name == "sinusoid-periodic":
        prm = profile.params
        periods = profile.length * abs(prm["alpha"]) / (2 * math.pi)
        Q0 = sinusoid_flux(prm["H_0"], prm["delta"], bc.U, bc.eta)
        zero_drop = bc.is_dirichlet and bc.P_0 == bc.P_N
        matching = (not bc.is_dirichlet) and math.isclose(bc.Q, Q0, rel_tol=1e-12, abs_tol=1e-15)
        if abs(periods - round(periods)) < 1e-9 and prm["delta"] > 0 and (zero_drop or matching):
            run_bc = bc.with_flux(Q0) if bc.is_dirichlet else bc

            def exact(x):
                return bc.P_N + sinusoid_exact_pressure(prm["H_0"], prm["delta"], prm["alpha"],
                                                        bc.U, bc.eta, x)
            return run_bc, exact, 0.0, "exact-sinusoid"
    if profile.is_piecewise:
        sol = pwl_pressure(profile, bc)
        return sol.bc, sol, sol.delta_p, "exact-piecewise"
    sol = pwl_pressure(sample_pwl(profile, ref_N), bc)
    return sol.bc, sol, sol.delta_p, f"pwl-N{ref_N}"


def convergence_study(method, spec, sizes, bc: BoundaryConditions, ref_N=None,
                      fd_method="banded") -> ConvergenceReport:
    """Errors and fitted orders of ``method`` on the grids ``sizes``.

    The periodic sinusoid with zero drop is compared with its exact pressure;
    piecewise heights with their exact piecewise-linear solution; any other
    height with a fine-grid PWL solution (``ref_N`` intervals).
    """
    spec = _as_spec(spec)
    sizes = [int(n) for n in sizes]
    if len(sizes) < 3:
        raise ValidationError("a convergence study needs at least three grid sizes")
    profile = build_profile(spec)
    if ref_N is None:
        ref_N = 16 * max(sizes)
    run_bc, exact, ref_dp, label = _reference(spec, profile, bc, ref_N)
    errs = {m: [] for m in NORMS}
    for N in sizes:
        sol = solve_method(method, profile, run_bc, N, fd_method=fd_method)
        l1, l2, linf = error_norms(sol, exact, sol.knots)
        errs["l1"].append(l1)
        errs["l2"].append(l2)
        errs["linf"].append(linf)
        errs["dP"].append(abs(sol.delta_p - ref_dp))
    orders, resid = {}, {}
    for m in NORMS:
        orders[m], resid[m] = fit_order(sizes, errs[m])
    return ConvergenceReport(method, spec.to_dict(), label, sizes, errs, orders, resid)


# ---------------------------------------------------------------------------
# timing


@dataclass
class TimingReport:
    method: str
    sizes: list
    medians: list
    slope: float
    fit_residual: float
    reps: int
    warmup: int
    times: list = field(default_factory=list)

    @property
    def decades(self):
        return math.log10(self.sizes[-1] / self.sizes[0])

    def to_dict(self):
        d = asdict(self)
        d["decades"] = self.decades
        return d

    def rows(self):
        for n, t in zip(self.sizes, self.medians):
            yield {"method": self.method, "N": n, "median_s": t}


DEFAULT_TIMING_SPEC = GeometrySpec("logistic", {"H_in": 2, "H_out": 1, "lambda": 32, "L": 16})


def _timed_solver(method, profile, bc, N, backend):
    """Closure running assembly and solve only (sampling is done here, once)."""
    if method == "pwl":
        prof = sample_pwl(profile, N)
        return lambda: solve_pwl(assemble_pwl(prof, bc), backend=backend)
    if method == "pwc":
        prof = sample_pwc(profile, N)
        return lambda: solve_pwc(assemble_pwc(prof, bc), backend=backend)
    if method in ("fd", "fd-banded"):
        # a continuous piecewise-linear sample has the same grid heights and
        # makes height evaluation inside assembly negligible
        prof = sample_pwl(profile, N)
        how = "dense" if method == "fd" else "banded"
        return lambda: solve_fd(assemble_fd(prof, bc, N), method=how)
    raise ValidationError(f"unknown timing method {method!r}")


def timing_study(methods, sizes, reps=5, warmup=2, spec=None, bc=None, backend=None,
                 clock=time.perf_counter):
    """Median wall time of assembly plus solve for each method and size.

    ``sizes`` is either one ascending list for all methods or a dict keyed
    by method.  ``"fd"`` times the dense LU path, ``"fd-banded"`` the banded one.
    """
    if reps < 5:
        raise ValidationError("timing needs reps >= 5")
    spec = _as_spec(spec) if spec is not None else DEFAULT_TIMING_SPEC
    bc = bc or BoundaryConditions(Q=1.0)
    profile = build_profile(spec)
    out = {}
    for method in methods:
        ns = sizes[method] if isinstance(sizes, dict) else sizes
        ns = [int(n) for n in ns]
        if ns != sorted(ns):
            raise ValidationError("sizes must be ascending")
        medians, all_times = [], []
        for N in ns:
            run = _timed_solver(method, profile, bc, N, backend)
            for _ in range(warmup):
                run()
            ts = []
            for _ in range(reps):
                t0 = clock()
                run()
                ts.append(clock() - t0)
            medians.append(float(np.median(ts)))
            all_times.append(ts)
        slope, resid = fit_slope(ns, medians)
        out[method] = TimingReport(method, ns, medians, slope, resid, reps, warmup, all_times)
    return out


# ---------------------------------------------------------------------------
# Reynolds versus Stokes


@dataclass
class ComparisonEntry:
    delta: float
    reynolds_dp: float
    stokes_dp: float
    ratio: float
    psi_below_wall: float
    psi_above_surface: float
    recirculation: bool
    cross_film_variation: float
    iterations: int
    residual: float


@dataclass
class ComparisonReport:
    geometry: dict
    bc: dict
    entries: list

    def to_dict(self):
        return {"geometry": self.geometry, "bc": self.bc, "entries": [asdict(e) for e in self.entries]}

    def rows(self):
        for e in self.entries:
            yield asdict(e)


def reynolds_pressure_drop(profile, bc, n_analytic=4096):
    if profile.is_piecewise:
        return pressure_drop(profile, bc)
    return pwl_pressure(sample_pwl(profile, n_analytic), bc).delta_p


def compare_reynolds_stokes(spec, bc: BoundaryConditions, deltas, config: StokesConfig | None = None,
                            fields=None) -> ComparisonReport:
    """Pressure drops, their ratio, recirculation and cross-film variation.

    ``fields`` (optional list) collects the solved Stokes fields.
    """
    spec = _as_spec(spec)
    profile = build_profile(spec)
    base = config or StokesConfig()
    if bc.is_dirichlet:
        from .core import resolve_flux
        if not profile.is_piecewise:
            raise ValidationError("give Q for comparisons on analytic heights")
        bc = resolve_flux(profile, bc)
    dp_re = reynolds_pressure_drop(profile, bc)
    entries = []
    for d in deltas:
        cfg = StokesConfig(delta=float(d), tol=base.tol, max_iter=base.max_iter,
                           relaxation=base.relaxation, scheme=base.scheme)
        fld = solve_stokes(profile, bc, cfg)
        if fields is not None:
            fields.append(fld)
        dp_s = stokes_pressure_drop(fld)
        below, above = stream_excursion(fld)
        thresh = RECIRCULATION_RTOL * max(abs(bc.Q), 1e-300)
        entries.append(ComparisonEntry(
            delta=float(d), reynolds_dp=float(dp_re), stokes_dp=dp_s,
            ratio=dp_s / dp_re if dp_re != 0 else float("nan"),
            psi_below_wall=below, psi_above_surface=above,
            recirculation=bool(below > thresh or above > thresh),
            cross_film_variation=cross_film_variation(fld),
            iterations=fld.iterations, residual=fld.residual))
    return ComparisonReport(spec.to_dict(), asdict(bc), entries)


# ---------------------------------------------------------------------------
# serialisation


def report_to_json(report):
    doc = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def reports_to_csv(reports):
    rows = [r for rep in reports for r in rep.rows()]
    if not rows:
        return ""
    buf = io.StringIO()
    keys = list(rows[0])
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
