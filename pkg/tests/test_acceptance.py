"""Acceptance criteria: each test prints one PASS/FAIL line and asserts it."""
import time

import numpy as np
import pytest

from lubrication import (BoundaryConditions, GeometrySpec, PiecewiseConstant, PiecewiseLinear,
                         assemble_pwc, build_profile, flux_at, pwc_pressure, pwl_pressure,
                         solve_stokes, tridiag_inverse, velocity_u, velocity_v)
from lubrication.analysis import compare_reynolds_stokes, convergence_study, timing_study
from lubrication.stokes import StokesConfig, cross_film_variation

from conftest import ACCEPTANCE, BFS, SINUSOID, WEDGE

SIZES = [64, 128, 256, 512, 1024]


def verdict(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE[number] = line
    print(line)
    assert ok, line


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def test_criterion_1_wedge_exactness():
    prof = build_profile(WEDGE)
    bc = BoundaryConditions(Q=1.0, U=0.0, P_N=0.0)
    pwl_pressure(prof, bc)                       # warm caches and compiled kernels
    times = []
    for _ in range(21):
        t0 = time.perf_counter()
        sol = pwl_pressure(prof, bc)
        times.append(time.perf_counter() - t0)
    got = [sol(0.0), sol(9.0), sol(16.0)]
    err = max(rel_err(got[:2], [103.5, 84.0]), abs(got[2]))
    t = float(np.median(times))
    verdict(1, "PWL exact on the wedge", err <= 1e-10 and t < 1e-3,
            f"p(0,9,16)={got}, max rel err {err:.1e}, median solve {t * 1e3:.3f} ms")


def test_criterion_2_step_exactness_and_fd_order():
    t0 = time.perf_counter()
    prof = build_profile(BFS)
    bc = BoundaryConditions(Q=1.0)
    exact = [108.0, 96.0, 0.0]
    e_pwc = np.max(np.abs(pwc_pressure(prof, bc).values - exact)) / 108
    e_pwl = np.max(np.abs(pwl_pressure(prof, bc).values - exact)) / 108
    rep = convergence_study("fd", BFS, SIZES, bc)
    order = rep.orders["linf"]
    elapsed = time.perf_counter() - t0
    ok = e_pwc <= 1e-10 and e_pwl <= 1e-10 and order <= 1.3 and elapsed < 30
    verdict(2, "step exact for PWC/PWL, FD first order", ok,
            f"PWC err {e_pwc:.1e}, PWL err {e_pwl:.1e}, FD linf order {order:.3f}, {elapsed:.2f} s")


def test_criterion_3_sinusoid_second_order():
    t0 = time.perf_counter()
    bc = BoundaryConditions(P_0=0.0, P_N=0.0, U=3.0, eta=1.0)
    orders = {}
    for method in ("fd", "pwc", "pwl"):
        rep = convergence_study(method, SINUSOID, SIZES, bc)
        assert rep.reference == "exact-sinusoid"
        orders[method] = rep.orders
    elapsed = time.perf_counter() - t0
    worst = max(abs(o - 2.0) for d in orders.values() for o in d.values())
    text = "; ".join(f"{m}: " + ", ".join(f"{k}={v:.3f}" for k, v in d.items())
                     for m, d in orders.items())
    verdict(3, "second order on the periodic sinusoid", worst <= 0.2 and elapsed < 60,
            f"{text}; {elapsed:.1f} s")


def test_criterion_4_complexity_slopes():
    t0 = time.perf_counter()
    sizes = {"pwl": [1000, 10000, 100000], "pwc": [1000, 10000, 100000],
             "fd": [1000, 1587, 2520, 4000]}
    reports = timing_study(["pwl", "pwc"], sizes, reps=5)
    reports.update(timing_study(["fd"], sizes, reps=7))
    slopes = {m: r.slope for m, r in reports.items()}
    targets = {"pwl": (1.0, 0.4), "pwc": (2.0, 0.4), "fd": (3.0, 0.5)}
    ok = all(abs(slopes[m] - c) <= w for m, (c, w) in targets.items())
    elapsed = time.perf_counter() - t0
    verdict(4, "timing slopes PWL~1, PWC~2, dense FD~3", ok and elapsed < 600,
            ", ".join(f"{m}={slopes[m]:.2f} (target {c}+-{w})" for m, (c, w) in targets.items())
            + f"; {elapsed:.0f} s")


def test_criterion_5_tridiagonal_inverse_oracle():
    rng = np.random.default_rng(5)
    worst = {"solver": 0.0, "plain": 0.0}
    worst_cond = 0.0
    for trial in range(200):
        n = int(rng.integers(1, 65))
        # Schur complements of genuine piecewise-constant systems with n+1 components
        x = np.concatenate([[0.0], np.cumsum(rng.uniform(0.01, 5.0, n + 1))])
        prof = PiecewiseConstant(x, rng.uniform(0.05, 5.0, n + 1))
        bc = BoundaryConditions(Q=1.0) if trial % 2 else BoundaryConditions(P_0=1.0)
        sys = assemble_pwc(prof, bc)
        K = sys.schur_dense()
        ref = np.linalg.inv(K)
        solver = tridiag_inverse(sys.alpha, sys.beta, excess=sys.excess).dense()
        plain = tridiag_inverse(sys.alpha, sys.beta).dense()
        worst["solver"] = max(worst["solver"], rel_err(solver, ref))
        worst["plain"] = max(worst["plain"], rel_err(plain, ref))
        worst_cond = max(worst_cond, np.linalg.cond(K))
    verdict(5, "element-wise inverse vs dense inversion", worst["solver"] <= 1e-9,
            f"200 matrices (cond up to {worst_cond:.1e}), max element-wise rel err: "
            f"solver recursion {worst['solver']:.1e}, plain recursion {worst['plain']:.1e}")


def test_criterion_6_stokes_flat_channel():
    t0 = time.perf_counter()
    prof = PiecewiseConstant([0.0, 1.0], [1.0])
    cfg = StokesConfig(delta=1 / 16)
    errs = {}
    for name, bc, psi_ex, u_ex in (
        ("poiseuille", BoundaryConditions(Q=1.0, U=0.0),
         lambda y: y * y * (3 - 2 * y), lambda y: 6 * y * (1 - y)),
        ("couette", BoundaryConditions(Q=0.5, U=1.0),
         lambda y: y - 0.5 * y * y, lambda y: 1 - y),
    ):
        fld = solve_stokes(prof, bc, cfg)
        y = fld.grid.y[None, :]
        errs[name] = max(np.max(np.abs(fld.psi - psi_ex(y))), np.max(np.abs(fld.u - u_ex(y))),
                         np.max(np.abs(fld.v)), cross_film_variation(fld))
    elapsed = time.perf_counter() - t0
    verdict(6, "Stokes flat channel exact", max(errs.values()) <= 1e-6 and elapsed < 60,
            ", ".join(f"{k} max err {v:.1e}" for k, v in errs.items()) + f"; {elapsed:.1f} s")


def test_criterion_7_reynolds_versus_stokes():
    t0 = time.perf_counter()
    step = compare_reynolds_stokes(BFS, BoundaryConditions(Q=1.0), [1 / 32]).entries[0]
    wedge = compare_reynolds_stokes(WEDGE, BoundaryConditions(Q=1.0), [1 / 32]).entries[0]
    elapsed = time.perf_counter() - t0
    ok = (step.recirculation and abs(step.stokes_dp) > 108 and not wedge.recirculation
          and 0.9 <= wedge.ratio <= 1.1 and elapsed < 600)
    verdict(7, "Stokes vs Reynolds on step and wedge", ok,
            f"step: dP_S={step.stokes_dp:.2f}, recirculation={step.recirculation} "
            f"(psi above Q by {step.psi_above_surface:.1e}, below 0 by {step.psi_below_wall:.1e}); "
            f"wedge: ratio={wedge.ratio:.3f}, recirculation={wedge.recirculation}; {elapsed:.1f} s")


def test_criterion_8_invariants():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    failures = []
    for _ in range(25):
        n = int(rng.integers(2, 30))
        x = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 2.0, n))])
        start = rng.uniform(0.2, 3.0, n)
        end = np.where(rng.random(n) < 0.3, start, rng.uniform(0.2, 3.0, n))
        lin = PiecewiseLinear(x, start, end)
        const = PiecewiseConstant(x, start)
        bc = BoundaryConditions(Q=rng.uniform(-2, 2), U=rng.uniform(-2, 2), P_N=rng.uniform(-1, 1))
        mids = 0.5 * (x[:-1] + x[1:])

        for prof in (lin, const):
            for sol in (pwl_pressure(prof, bc),) + ((pwc_pressure(prof, bc),) if prof is const else ()):
                q = flux_at(sol, mids)
                if np.max(np.abs(q - bc.Q)) > 1e-10 * max(1.0, abs(bc.Q)):
                    failures.append("flux constancy")
                xs = rng.uniform(x[0], x[-1], 100)
                hs = prof(xs)
                if np.max(np.abs(velocity_u(sol, xs, 0 * xs) - bc.U)) > 1e-12 * max(1, abs(bc.U)):
                    failures.append("no-slip lower")
                if np.max(np.abs(velocity_u(sol, xs, hs))) > 1e-12 * max(1, np.max(np.abs(velocity_u(sol, xs, 0.5 * hs)))):
                    failures.append("no-slip upper")
                if np.max(np.abs(velocity_v(sol, xs, 0 * xs))) > 1e-12:
                    failures.append("no-penetration")

        sol = pwl_pressure(lin, bc)
        scale = np.max(np.abs(sol.values))
        jump = np.abs(sol(x[1:-1], side="left") - sol(x[1:-1], side="right"))
        if np.max(jump) > 1e-10 * scale:
            failures.append("continuity")

        a, b = pwl_pressure(const, bc).values, pwc_pressure(const, bc).values
        if np.max(np.abs(a - b)) > 1e-9 * np.max(np.abs(b)):
            failures.append("PWC/PWL agreement")

        c = rng.uniform(0.1, 10)
        p1 = pwl_pressure(lin, bc).values - bc.P_N
        pc = pwl_pressure(lin, bc.scaled_viscosity(c)).values - bc.P_N
        if np.max(np.abs(pc - c * p1)) > 1e-10 * max(1.0, np.max(np.abs(c * p1))):
            failures.append("eta scaling")
    elapsed = time.perf_counter() - t0
    detail = "all held" if not failures else f"violations: {sorted(set(failures))}"
    verdict(8, "invariant suite", not failures and elapsed < 60,
            f"25 random profiles, {detail}; {elapsed:.1f} s")
