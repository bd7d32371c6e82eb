"""Optional numba acceleration.

Kernels are written once as plain loops and decorated with :func:`njit`.
When numba is importable and ``LUBRICATION_DISABLE_NUMBA`` is unset (or
``0``), the default backend is ``"numba"``; otherwise every public kernel
falls back to its vectorised numpy twin.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None

_flag = os.environ.get("LUBRICATION_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

DEFAULT_BACKEND = "numba" if (HAVE_NUMBA and not DISABLED) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` with on-disk caching, or the identity when unavailable."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def resolve_backend(backend=None):
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not installed")
    return backend
