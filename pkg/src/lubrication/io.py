"""CSV and JSON writers with fixed headers and 17 significant digits."""
from __future__ import annotations

import json
import os

import numpy as np

from .core import velocity_u, velocity_v

PRESSURE_HEADER = ("x", "p", "dpdx")
VELOCITY_HEADER = ("x", "y", "u", "v")
FIELD_HEADER = ("x", "y", "mask", "psi", "u", "v", "p")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _write_rows(path, header, columns):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_pressure_csv(sol, path, x=None):
    """Columns ``x, p, dpdx`` (right-sided gradient) at the knots or at ``x``."""
    x = sol.knots if x is None else np.asarray(x, dtype=float)
    p = np.atleast_1d(sol(x))
    g = np.atleast_1d(sol.dpdx(x, "right"))
    _write_rows(path, PRESSURE_HEADER, (x, p, g))


def velocity_samples(sol, nx, ny):
    """``u, v`` on ``nx`` stations times ``ny`` points from the wall to h(x).

    Stations avoid knots so that ``v`` is single valued.
    """
    x = np.linspace(sol.x0, sol.xN, int(nx) + 2)[1:-1]
    at = sol.at_knot(x)
    if np.any(at):
        shift = 1e-9 * (sol.xN - sol.x0)
        x = np.where(at, x + shift, x)
    h = np.asarray(sol.profile(x, "right"), dtype=float)
    t = np.linspace(0.0, 1.0, int(ny))
    X = np.repeat(x, t.size)
    Y = (h[:, None] * t[None, :]).ravel()
    Y = np.minimum(Y, np.repeat(h, t.size))
    return X, Y, np.atleast_1d(velocity_u(sol, X, Y)), np.atleast_1d(velocity_v(sol, X, Y, side="right"))


def write_velocity_csv(sol, path, nx=64, ny=17):
    _write_rows(path, VELOCITY_HEADER, velocity_samples(sol, nx, ny))


def write_field_csv(fld, path):
    """Every grid node: ``x, y, mask, psi, u, v, p`` (mask is the node kind code)."""
    g = fld.grid
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    cols = [X.ravel(), Y.ravel(), g.kind.astype(np.int64).ravel()]
    for a in (fld.psi, fld.u, fld.v, fld.p):
        cols.append(np.asarray(a, dtype=float).ravel())
    _write_rows(path, FIELD_HEADER, cols)


def write_json(doc, path):
    from .analysis import _json_default
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def write_text(text, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def ensure_outdir(path):
    if os.path.exists(path) and not os.path.isdir(path):
        raise NotADirectoryError(f"{path} exists and is not a directory")
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"{path} is not writable")
