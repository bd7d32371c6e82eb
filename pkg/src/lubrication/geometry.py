"""Film-height profiles h(x) and their piecewise discretisations.

Three profile kinds are supported:

* :class:`PiecewiseConstant` -- constant height on each interval.
* :class:`PiecewiseLinear` -- linear height on each interval; both one-sided
  limits are stored at interior knots so jumps are representable.
* :class:`AnalyticProfile` -- a closed-form height (logistic step, sinusoids,
  user expressions) that solvers consume only after sampling.

Named geometries are described by a :class:`GeometrySpec` and turned into
profiles with :func:`build_profile`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import InvalidGeometry, OutOfDomain

# relative slack when deciding whether a query point lies in the domain
_DOMAIN_RTOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_knots(knots):
    if knots.ndim != 1 or knots.size < 2:
        raise InvalidGeometry("knots", "need at least two knots")
    if not np.all(np.isfinite(knots)):
        raise InvalidGeometry("knots", "knots must be finite")
    if np.any(np.diff(knots) <= 0):
        raise InvalidGeometry("knots", "knots must be strictly increasing")


class HeightProfile:
    """Base class: a positive film height on ``[x0, xN]``."""

    kind = "abstract"
    x0: float
    xN: float

    @property
    def length(self):
        return self.xN - self.x0

    def __call__(self, x, side="right"):
        raise NotImplementedError

    def derivative(self, x, side="right"):
        raise NotImplementedError

    @property
    def is_piecewise(self):
        return False

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        tol = _DOMAIN_RTOL * max(1.0, abs(self.x0), abs(self.xN))
        if np.any(x < self.x0 - tol) or np.any(x > self.xN + tol):
            raise OutOfDomain(
                f"x outside the profile domain [{self.x0}, {self.xN}]")
        return np.clip(x, self.x0, self.xN)


class _Piecewise(HeightProfile):
    knots: np.ndarray

    @property
    def is_piecewise(self):
        return True

    @property
    def x0(self):
        return float(self.knots[0])

    @property
    def xN(self):
        return float(self.knots[-1])

    @property
    def n_components(self):
        return self.knots.size - 1

    @property
    def widths(self):
        return np.diff(self.knots)

    def interval_index(self, x, side="right"):
        """Index of the interval that owns ``x`` for the requested side.

        At an interior knot ``x_k`` the right side is interval ``k`` and the
        left side is interval ``k - 1``; the domain ends always map inwards.
        """
        x = self._locate(x)
        n = self.n_components
        if side == "right":
            idx = np.searchsorted(self.knots, x, side="right") - 1
        elif side == "left":
            idx = np.searchsorted(self.knots, x, side="left") - 1
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        return np.clip(idx, 0, n - 1)


class PiecewiseConstant(_Piecewise):
    kind = "piecewise-constant"

    def __init__(self, knots, values):
        knots = _frozen(knots)
        values = _frozen(values)
        _check_knots(knots)
        if values.shape != (knots.size - 1,):
            raise InvalidGeometry("values", "need one value per interval")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidGeometry("values", "heights must be positive")
        self.knots = knots
        self.values = values

    def __call__(self, x, side="right"):
        h = self.values[self.interval_index(x, side)]
        return float(h) if np.ndim(h) == 0 else h

    def derivative(self, x, side="right"):
        d = np.zeros_like(np.asarray(self._locate(x), dtype=float))
        return float(d) if d.ndim == 0 else d

    def to_linear(self):
        return PiecewiseLinear(self.knots, self.values, self.values)

    def __repr__(self):
        return f"PiecewiseConstant(knots={self.knots.tolist()}, values={self.values.tolist()})"


class PiecewiseLinear(_Piecewise):
    """Linear height on each interval.

    ``start[k]`` is the limit of h at ``x_k`` from the right and ``end[k]``
    the limit at ``x_{k+1}`` from the left.
    """

    kind = "piecewise-linear"

    def __init__(self, knots, start, end):
        knots = _frozen(knots)
        start = _frozen(start)
        end = _frozen(end)
        _check_knots(knots)
        n = knots.size - 1
        for name, arr in (("start", start), ("end", end)):
            if arr.shape != (n,):
                raise InvalidGeometry(name, "need one value per interval")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise InvalidGeometry(name, "heights must be positive")
        self.knots = knots
        self.start = start
        self.end = end

    @classmethod
    def from_nodes(cls, knots, heights):
        """Continuous interpolant through ``(knots[i], heights[i])``."""
        heights = np.asarray(heights, dtype=float)
        return cls(knots, heights[:-1], heights[1:])

    @property
    def slopes(self):
        return (self.end - self.start) / self.widths

    def __call__(self, x, side="right"):
        x = self._locate(x)
        k = self.interval_index(x, side)
        t = (x - self.knots[k]) / (self.knots[k + 1] - self.knots[k])
        # convex combination: exact at both interval ends
        h = (1.0 - t) * self.start[k] + t * self.end[k]
        return float(h) if np.ndim(h) == 0 else h

    def derivative(self, x, side="right"):
        d = self.slopes[self.interval_index(x, side)]
        return float(d) if np.ndim(d) == 0 else d

    def __repr__(self):
        return (f"PiecewiseLinear(knots={self.knots.tolist()}, "
                f"start={self.start.tolist()}, end={self.end.tolist()})")


class AnalyticProfile(HeightProfile):
    """Closed-form height; ``func``/``deriv`` take and return arrays."""

    kind = "analytic"

    def __init__(self, name, x0, xN, func: Callable, deriv: Callable | None = None,
                 params=None, n_check=1001):
        if not (math.isfinite(x0) and math.isfinite(xN) and x0 < xN):
            raise InvalidGeometry("domain", "need finite x0 < xN")
        self.name = name
        self.x0 = float(x0)
        self.xN = float(xN)
        self._func = func
        self._deriv = deriv
        self.params = dict(params or {})
        check_positive(self, n_check)

    def __call__(self, x, side="right"):
        x = self._locate(x)
        h = self._func(x)
        return float(h) if np.ndim(h) == 0 else np.asarray(h, dtype=float)

    def derivative(self, x, side="right"):
        x = self._locate(x)
        if self._deriv is not None:
            d = self._deriv(x)
        else:
            # centred difference, pulled inside the domain at the ends
            eps = 1e-6 * self.length
            lo = np.maximum(x - eps, self.x0)
            hi = np.minimum(x + eps, self.xN)
            d = (self._func(hi) - self._func(lo)) / (hi - lo)
        return float(d) if np.ndim(d) == 0 else np.asarray(d, dtype=float)

    def __repr__(self):
        return f"AnalyticProfile({self.name!r}, [{self.x0}, {self.xN}], {self.params})"


def check_positive(profile, n=1001):
    """Raise :class:`InvalidGeometry` unless h > 0 on a dense sample."""
    x = np.linspace(profile.x0, profile.xN, max(int(n), 2))
    if profile.is_piecewise:
        x = np.union1d(x, profile.knots)
        h = np.concatenate([profile(x, "left"), profile(x, "right")])
    else:
        h = profile(x)
    if not np.all(np.isfinite(h)) or np.any(h <= 0):
        raise InvalidGeometry("h", "height must be positive on the whole domain")


def eval_height(profile, x, side="right"):
    """One-sided height at ``x`` (plain value away from knots)."""
    return profile(x, side)


def uniform_knots(profile, n):
    if int(n) != n or n < 1:
        raise InvalidGeometry("N", "need at least one interval")
    return np.linspace(profile.x0, profile.xN, int(n) + 1)


def sample_pwc(profile, n):
    """Constant height per uniform interval: the mean of its two end heights."""
    x = uniform_knots(profile, n)
    if not profile.is_piecewise:
        check_positive(profile, 10 * n)
    values = 0.5 * (profile(x[:-1], "right") + profile(x[1:], "left"))
    return PiecewiseConstant(x, values)


def sample_pwl(profile, n):
    """Linear interpolant per uniform interval, one-sided at the interval ends."""
    x = uniform_knots(profile, n)
    if not profile.is_piecewise:
        check_positive(profile, 10 * n)
    return PiecewiseLinear(x, profile(x[:-1], "right"), profile(x[1:], "left"))


def as_piecewise_linear(profile):
    if isinstance(profile, PiecewiseLinear):
        return profile
    if isinstance(profile, PiecewiseConstant):
        return profile.to_linear()
    raise TypeError("analytic profiles must be sampled first (see sample_pwl)")


# ---------------------------------------------------------------------------
# named geometries

_PARAMS = {
    "bfs": ("H_in", "H_out", "l", "L"),
    "wedge": ("H_in", "H_out", "l_in", "l_out", "l_wedge"),
    "logistic": ("H_in", "H_out", "lambda", "L"),
    "sinusoid-cavity": ("H_0", "delta", "k", "l", "L"),
    "sinusoid-periodic": ("H_0", "delta", "alpha", "L"),
    "flat": ("H", "L"),
    "custom": (),
}

_ALIASES = {
    "backward-facing-step": "bfs",
    "step": "bfs",
    "sinusoid": "sinusoid-cavity",
    "cavity": "sinusoid-cavity",
    "periodic": "sinusoid-periodic",
}

# parameters that may be omitted
_OPTIONAL = {"sinusoid-periodic": ("L",), "flat": ("L",)}


@dataclass(frozen=True)
class GeometrySpec:
    """A named geometry plus its parameters, e.g. ``GeometrySpec("bfs", {...})``."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        name = _ALIASES.get(self.name.lower(), self.name.lower())
        if name not in _PARAMS:
            raise InvalidGeometry("geometry", f"unknown geometry {self.name!r}")
        params = dict(self.params)
        if "lam" in params and name == "logistic":
            params["lambda"] = params.pop("lam")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "params", params)

    def to_dict(self):
        return {"geometry": self.name, "params": dict(self.params)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        if "geometry" not in doc:
            raise InvalidGeometry("geometry", "missing geometry name")
        return cls(doc["geometry"], dict(doc.get("params", {})))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _num(params, key, name):
    if key not in params:
        raise InvalidGeometry(key, f"missing parameter for {name}")
    try:
        value = float(params[key])
    except (TypeError, ValueError):
        raise InvalidGeometry(key, "must be a number") from None
    if not math.isfinite(value):
        raise InvalidGeometry(key, "must be finite")
    return value


def _positive(value, key):
    if value <= 0:
        raise InvalidGeometry(key, "must be > 0")
    return value


def build_profile(spec: GeometrySpec) -> HeightProfile:
    """Exact profile for a named geometry."""
    builder = _BUILDERS[spec.name]
    p = spec.params
    expected = _PARAMS[spec.name]
    unknown = set(p) - set(expected) if expected else set()
    if unknown:
        raise InvalidGeometry(sorted(unknown)[0], f"unknown parameter for {spec.name}")
    return builder(p)


def _build_bfs(p):
    h_in, h_out = _num(p, "H_in", "bfs"), _num(p, "H_out", "bfs")
    l, L = _num(p, "l", "bfs"), _num(p, "L", "bfs")
    _positive(h_out, "H_out")
    if not h_in > h_out:
        raise InvalidGeometry("H_in", "must exceed H_out (H_in > H_out > 0)")
    if not 0 < l < L:
        raise InvalidGeometry("l", "step position must satisfy 0 < l < L")
    return PiecewiseConstant([0.0, l, L], [h_in, h_out])


def _build_wedge(p):
    h_in, h_out = _num(p, "H_in", "wedge"), _num(p, "H_out", "wedge")
    l_in, l_out = _num(p, "l_in", "wedge"), _num(p, "l_out", "wedge")
    l_w = _num(p, "l_wedge", "wedge")
    _positive(h_out, "H_out")
    if h_in < h_out:
        raise InvalidGeometry("H_in", "must be >= H_out")
    _positive(l_w, "l_wedge")
    for key, val in (("l_in", l_in), ("l_out", l_out)):
        if val < 0:
            raise InvalidGeometry(key, "must be >= 0")
    knots, start, end = [0.0], [], []
    for width, a, b in ((l_in, h_in, h_in), (l_w, h_in, h_out), (l_out, h_out, h_out)):
        if width > 0:
            knots.append(knots[-1] + width)
            start.append(a)
            end.append(b)
    return PiecewiseLinear(knots, start, end)


def _build_logistic(p):
    h_in, h_out = _num(p, "H_in", "logistic"), _num(p, "H_out", "logistic")
    lam, L = _num(p, "lambda", "logistic"), _num(p, "L", "logistic")
    _positive(h_out, "H_out")
    if h_in < h_out:
        raise InvalidGeometry("H_in", "must be >= H_out")
    _positive(lam, "lambda")
    _positive(L, "L")
    dh = h_out - h_in

    def func(x):
        return h_in + dh * expit(lam * (x - 0.5 * L))

    def deriv(x):
        s = expit(lam * (x - 0.5 * L))
        return dh * lam * s * (1.0 - s)

    return AnalyticProfile("logistic", 0.0, L, func, deriv,
                           params={"H_in": h_in, "H_out": h_out, "lambda": lam, "L": L})


def _amplitude(p, name):
    h0, delta = _num(p, "H_0", name), _num(p, "delta", name)
    _positive(h0, "H_0")
    if not 0 <= delta < 1:
        raise InvalidGeometry("delta", "must satisfy 0 <= delta < 1")
    return h0, delta


def _build_sinusoid_cavity(p):
    h0, delta = _amplitude(p, "sinusoid-cavity")
    k_raw = _num(p, "k", "sinusoid-cavity")
    if k_raw != int(k_raw) or k_raw < 1:
        raise InvalidGeometry("k", "must be a positive integer")
    k = int(k_raw)
    l, L = _num(p, "l", "sinusoid-cavity"), _num(p, "L", "sinusoid-cavity")
    _positive(l, "l")
    if L < l:
        raise InvalidGeometry("L", "must be >= l")
    flat = h0 * (1 + delta) if k % 2 == 0 else h0 * (1 - delta)
    wave = math.pi * k / l

    # the symmetric domain [-L, L] is shifted to [0, 2L]
    def func(x):
        s = np.asarray(x, dtype=float) - L
        return np.where(np.abs(s) < l, h0 * (1 + delta * np.cos(wave * s)), flat)

    def deriv(x):
        s = np.asarray(x, dtype=float) - L
        return np.where(np.abs(s) < l, -h0 * delta * wave * np.sin(wave * s), 0.0)

    return AnalyticProfile("sinusoid-cavity", 0.0, 2 * L, func, deriv,
                           params={"H_0": h0, "delta": delta, "k": k, "l": l, "L": L})


def _build_sinusoid_periodic(p):
    h0, delta = _amplitude(p, "sinusoid-periodic")
    alpha = _num(p, "alpha", "sinusoid-periodic")
    if alpha == 0:
        raise InvalidGeometry("alpha", "must be nonzero")
    L = _num(p, "L", "sinusoid-periodic") if "L" in p else 2 * math.pi / abs(alpha)
    _positive(L, "L")

    def func(x):
        return h0 * (1 + delta * np.cos(alpha * np.asarray(x, dtype=float)))

    def deriv(x):
        return -h0 * delta * alpha * np.sin(alpha * np.asarray(x, dtype=float))

    return AnalyticProfile("sinusoid-periodic", 0.0, L, func, deriv,
                           params={"H_0": h0, "delta": delta, "alpha": alpha, "L": L})


def _build_flat(p):
    h = _positive(_num(p, "H", "flat"), "H")
    L = _positive(_num(p, "L", "flat"), "L") if "L" in p else 1.0
    return PiecewiseConstant([0.0, L], [h])


_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh",
                 "cosh", "sinh", "arctan", "where", "minimum", "maximum", "pi")
}


def _build_custom(p):
    if "expr" in p:
        x0, xN = _num(p, "x0", "custom"), _num(p, "xN", "custom")
        expr = str(p["expr"])
        try:
            code = compile(expr, "<height>", "eval")
        except SyntaxError as exc:
            raise InvalidGeometry("expr", f"cannot parse: {exc.msg}") from None

        def func(x):
            x = np.asarray(x, dtype=float)
            out = eval(code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, "x": x})
            return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()

        return AnalyticProfile("custom", x0, xN, func, None,
                               params={"expr": expr, "x0": x0, "xN": xN})
    if "x" not in p:
        raise InvalidGeometry("x", "custom geometry needs 'x' knots or an 'expr'")
    x = np.asarray(p["x"], dtype=float)
    if "h_start" in p or "h_end" in p:
        return PiecewiseLinear(x, p.get("h_start"), p.get("h_end"))
    if "h" not in p:
        raise InvalidGeometry("h", "custom geometry needs heights 'h'")
    h = np.asarray(p["h"], dtype=float)
    if h.size == x.size - 1:
        return PiecewiseConstant(x, h)
    if h.size == x.size:
        return PiecewiseLinear.from_nodes(x, h)
    raise InvalidGeometry("h", "need len(h) == len(x) (linear) or len(x) - 1 (constant)")


_BUILDERS = {
    "bfs": _build_bfs,
    "wedge": _build_wedge,
    "logistic": _build_logistic,
    "sinusoid-cavity": _build_sinusoid_cavity,
    "sinusoid-periodic": _build_sinusoid_periodic,
    "flat": _build_flat,
    "custom": _build_custom,
}


def geometry_names():
    return sorted(_PARAMS)


def geometry_params(name):
    name = _ALIASES.get(name.lower(), name.lower())
    return _PARAMS[name]
