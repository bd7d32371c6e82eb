"""Command-line front end.

Subcommands::

    solve     one Reynolds (or Stokes) solve -> pressure.csv, report.json
    converge  grid-convergence study        -> convergence.csv, report.json
    bench     timing study                  -> timing.csv, report.json
    compare   Reynolds versus Stokes        -> comparison.csv, field.csv, report.json

Every run also writes ``manifest.json`` (config, versions, wall time).
Exit codes: 0 success, 2 invalid input, 1 solver failure.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .analysis import (METHODS, compare_reynolds_stokes, convergence_study, report_to_json,
                       reports_to_csv, timing_study)
from .core import BoundaryConditions, LubricationRegime
from .errors import SolverError, ValidationError
from .geometry import GeometrySpec, build_profile, sample_pwc, sample_pwl
from .io import (ensure_outdir, write_field_csv, write_json, write_pressure_csv, write_text,
                 write_velocity_csv)
from .pwc import pwc_pressure
from .pwl import pwl_pressure
from .fd import fd_pressure
from .stokes import StokesConfig, solve_stokes

# flag -> geometry parameter name
GEOMETRY_FLAGS = {
    "Hin": "H_in", "Hout": "H_out", "l": "l", "L": "L", "lin": "l_in", "lout": "l_out",
    "lwedge": "l_wedge", "lam": "lambda", "H0": "H_0", "delta": "delta", "k": "k",
    "alpha": "alpha", "H": "H",
}
BC_FLAGS = {"Q": "Q", "P0": "P_0", "dP": "dP", "PN": "P_N", "U": "U", "eta": "eta"}
STOKES_FLAGS = {"stokes_delta": "delta", "tol": "tol", "max_iter": "max_iter",
                "relaxation": "relaxation", "scheme": "scheme"}


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def _str_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser():
    parser = _Parser(prog="lubrication", description="Reynolds and Stokes thin-film solvers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    g = common.add_argument_group("geometry")
    g.add_argument("--config", help="JSON file with geometry/params/bc/... (flags override it)")
    g.add_argument("--geometry", help="bfs, wedge, logistic, sinusoid-cavity, sinusoid-periodic, flat, custom")
    for flag in GEOMETRY_FLAGS:
        g.add_argument(f"--{flag}", type=float, default=None)
    b = common.add_argument_group("boundary conditions")
    for flag in BC_FLAGS:
        b.add_argument(f"--{flag}", type=float, default=None)
    common.add_argument("--out", default=None, help="output directory (default: out)")

    stokes = _Parser(add_help=False)
    s = stokes.add_argument_group("stokes")
    s.add_argument("--stokes-delta", dest="stokes_delta", type=_float_list, default=None,
                   help="grid spacing(s), comma separated")
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    s.add_argument("--relaxation", type=float, default=None)
    s.add_argument("--scheme", choices=("direct", "sor"), default=None)

    p = sub.add_parser("solve", parents=[common, stokes], help="single solve")
    p.add_argument("--method", choices=METHODS + ("stokes",), default=None)
    p.add_argument("--N", type=int, default=None, help="intervals (required for analytic heights and fd)")
    p.add_argument("--velocity", type=_int_list, default=None, metavar="NX,NY",
                   help="also write velocity.csv on NX stations by NY points")

    p = sub.add_parser("converge", parents=[common], help="grid convergence study")
    p.add_argument("--methods", type=_str_list, default=None)
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--ref-N", dest="ref_N", type=int, default=None)

    p = sub.add_parser("bench", parents=[common], help="timing study")
    p.add_argument("--methods", type=_str_list, default=None)
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--fd-sizes", dest="fd_sizes", type=_int_list, default=None,
                   help="separate sizes for the dense fd path")
    p.add_argument("--reps", type=int, default=None)

    sub.add_parser("compare", parents=[common, stokes], help="Reynolds versus Stokes")
    return parser


# ---------------------------------------------------------------------------
# configuration


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    return doc


def resolve_config(args):
    """Merge the JSON config with flags (flags win) into one plain dict."""
    doc = _load_config(getattr(args, "config", None))
    cfg = {"command": args.command}
    name = args.geometry or doc.get("geometry")
    if not name:
        raise ValidationError("geometry: no geometry given (use --geometry or a config file)")
    params = dict(doc.get("params", {}))
    for flag, key in GEOMETRY_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            params[key] = val
    spec = GeometrySpec(name, params)
    cfg["geometry"] = spec.to_dict()

    bc = dict(doc.get("bc", {}))
    for flag, key in BC_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            bc[key] = val
    cfg["bc"] = bc
    cfg["out"] = args.out or doc.get("out") or "out"

    if args.command == "solve":
        cfg["method"] = args.method or doc.get("method") or "pwl"
        cfg["N"] = args.N if args.N is not None else doc.get("N")
        cfg["velocity"] = args.velocity or doc.get("velocity")
    if args.command in ("converge", "bench"):
        cfg["methods"] = args.methods or doc.get("methods") or list(METHODS)
        cfg["sizes"] = args.sizes or doc.get("sizes")
    if args.command == "converge":
        cfg["ref_N"] = args.ref_N if args.ref_N is not None else doc.get("ref_N")
    if args.command == "bench":
        cfg["fd_sizes"] = args.fd_sizes or doc.get("fd_sizes")
        cfg["reps"] = args.reps if args.reps is not None else doc.get("reps", 5)
    if args.command in ("compare", "solve"):
        st = dict(doc.get("stokes", {}))
        for flag, key in STOKES_FLAGS.items():
            val = getattr(args, flag, None)
            if val is not None:
                st[key] = val
        cfg["stokes"] = st
    return cfg


def make_bc(bc):
    bc = dict(bc)
    dP = bc.pop("dP", None)
    P_N = float(bc.pop("P_N", 0.0))
    if dP is not None:
        if "P_0" in bc:
            raise ValidationError("give at most one of --P0 and --dP")
        bc["P_0"] = P_N - float(dP)
    unknown = set(bc) - {"Q", "P_0", "U", "eta"}
    if unknown:
        raise ValidationError(f"unknown boundary-condition key {sorted(unknown)[0]!r}")
    return BoundaryConditions(Q=bc.get("Q"), P_N=P_N, U=float(bc.get("U", 0.0)),
                              eta=float(bc.get("eta", 1.0)), P_0=bc.get("P_0"))


def _stokes_configs(st):
    st = dict(st)
    deltas = st.pop("delta", None)
    if deltas is None:
        deltas = [1.0 / 32.0]
    if not isinstance(deltas, (list, tuple)):
        deltas = [deltas]
    base = StokesConfig.from_dict({"delta": float(deltas[0]), **st})
    return [StokesConfig.from_dict({**base.to_dict(), "delta": float(d)}) for d in deltas]


def _check_outdir(path):
    if os.path.exists(path):
        if not os.path.isdir(path):
            raise ValidationError(f"out: {path} exists and is not a directory")
        if not os.access(path, os.W_OK):
            raise ValidationError(f"out: {path} is not writable")
        return
    parent = os.path.dirname(os.path.abspath(path))
    while not os.path.exists(parent):
        parent = os.path.dirname(parent)
    if not os.access(parent, os.W_OK):
        raise ValidationError(f"out: cannot create {path}")


def _sizes(cfg, key="sizes"):
    sizes = cfg.get(key)
    if not sizes:
        raise ValidationError(f"{key}: no grid sizes given")
    sizes = [int(n) for n in sizes]
    if any(n < 1 for n in sizes) or sizes != sorted(sizes):
        raise ValidationError(f"{key}: sizes must be positive and ascending")
    return sizes


# ---------------------------------------------------------------------------
# subcommands: each returns a callable that runs after validation


def _prepare_solve(cfg):
    profile = build_profile(GeometrySpec.from_dict(cfg["geometry"]))
    bc = make_bc(cfg["bc"])
    method, N = cfg["method"], cfg["N"]
    if N is not None and (int(N) != N or N < 1):
        raise ValidationError("N: must be a positive integer")
    if method == "fd" and N is None:
        raise ValidationError("N: the fd method needs --N")
    if method in ("pwc", "pwl") and N is None:
        exact_ok = profile.is_piecewise and (method == "pwl" or profile.kind == "piecewise-constant")
        if not exact_ok:
            raise ValidationError(f"N: --N is required to sample this height for {method}")
    if cfg.get("velocity") is not None and len(cfg["velocity"]) != 2:
        raise ValidationError("velocity: expected NX,NY")
    configs = _stokes_configs(cfg["stokes"]) if method == "stokes" else None

    def run(out):
        report = {"method": method, "geometry": cfg["geometry"], "N": N}
        if method == "stokes":
            fld = solve_stokes(profile, bc, configs[-1])
            write_field_csv(fld, os.path.join(out, "field.csv"))
            from .stokes import cross_film_variation, stokes_pressure_drop, stream_excursion
            report.update(delta=configs[-1].delta, iterations=fld.iterations, residual=fld.residual,
                          delta_p=stokes_pressure_drop(fld), cross_film_variation=cross_film_variation(fld),
                          psi_excursion=list(stream_excursion(fld)))
            return report, ["field.csv", "report.json"]
        if method == "fd":
            sol = fd_pressure(profile, bc, N)
        elif method == "pwc":
            sol = pwc_pressure(profile if N is None else sample_pwc(profile, N), bc)
        else:
            sol = pwl_pressure(profile if N is None else sample_pwl(profile, N), bc)
        write_pressure_csv(sol, os.path.join(out, "pressure.csv"))
        files = ["pressure.csv", "report.json"]
        if cfg.get("velocity"):
            write_velocity_csv(sol, os.path.join(out, "velocity.csv"), *cfg["velocity"])
            files.insert(1, "velocity.csv")
        reg = LubricationRegime.from_profile(profile, sol.bc.Q, eta=bc.eta)
        report.update(flux=sol.bc.Q, p0=float(sol.values[0]), pN=float(sol.values[-1]),
                      delta_p=sol.delta_p, knots=int(sol.knots.size),
                      regime={"epsilon": reg.epsilon, "reynolds": reg.reynolds,
                              "scaled_reynolds": reg.scaled_reynolds})
        return report, files

    return run


def _prepare_converge(cfg):
    spec = GeometrySpec.from_dict(cfg["geometry"])
    build_profile(spec)
    bc = make_bc(cfg["bc"])
    sizes = _sizes(cfg)
    if len(sizes) < 3:
        raise ValidationError("sizes: a convergence study needs at least three sizes")
    methods = list(cfg["methods"])
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"methods: unknown method {m!r}")
    if min(sizes) < 3 and "fd" in methods:
        raise ValidationError("sizes: fd needs N >= 3")

    def run(out):
        reports = [convergence_study(m, spec, sizes, bc, ref_N=cfg.get("ref_N")) for m in methods]
        write_text(reports_to_csv(reports), os.path.join(out, "convergence.csv"))
        return {"convergence": [r.to_dict() for r in reports]}, ["convergence.csv", "report.json"]

    return run


def _prepare_bench(cfg):
    spec = GeometrySpec.from_dict(cfg["geometry"])
    build_profile(spec)
    bc = make_bc(cfg["bc"])
    sizes = _sizes(cfg)
    methods = list(cfg["methods"])
    for m in methods:
        if m not in METHODS + ("fd-banded",):
            raise ValidationError(f"methods: unknown method {m!r}")
    reps = int(cfg["reps"])
    if reps < 5:
        raise ValidationError("reps: need at least 5 repetitions")
    per_method = {m: sizes for m in methods}
    if cfg.get("fd_sizes") and "fd" in methods:
        per_method["fd"] = _sizes(cfg, "fd_sizes")

    def run(out):
        reports = timing_study(methods, per_method, reps=reps, spec=spec, bc=bc)
        write_text(reports_to_csv(reports.values()), os.path.join(out, "timing.csv"))
        return {"timing": {m: r.to_dict() for m, r in reports.items()}}, ["timing.csv", "report.json"]

    return run


def _prepare_compare(cfg):
    spec = GeometrySpec.from_dict(cfg["geometry"])
    build_profile(spec)
    bc = make_bc(cfg["bc"])
    configs = _stokes_configs(cfg["stokes"])

    def run(out):
        fields = []
        rep = compare_reynolds_stokes(spec, bc, [c.delta for c in configs], configs[0], fields=fields)
        write_text(reports_to_csv([rep]), os.path.join(out, "comparison.csv"))
        write_field_csv(fields[-1], os.path.join(out, "field.csv"))
        return rep.to_dict(), ["comparison.csv", "field.csv", "report.json"]

    return run


PREPARE = {"solve": _prepare_solve, "converge": _prepare_converge,
           "bench": _prepare_bench, "compare": _prepare_compare}


def _versions():
    import numba
    import scipy
    return {"lubrication": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def run(argv=None):
    """Entry point returning an exit code (0 ok, 2 invalid input, 1 solver failure)."""
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        task = PREPARE[cfg["command"]](cfg)
        _check_outdir(cfg["out"])
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        ensure_outdir(cfg["out"])
        report, files = task(cfg["out"])
        write_json(report, os.path.join(cfg["out"], "report.json"))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    manifest = {"config": cfg, "versions": _versions(), "files": files,
                "wall_time_s": time.perf_counter() - t0}
    write_json(manifest, os.path.join(cfg["out"], "manifest.json"))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
