"""Hot loops, each with a numba body and a numpy twin.

Every public function takes ``backend=None`` (use the process default from
:mod:`lubrication._accel`), ``"numba"`` or ``"numpy"``.  Both paths compute
the same quantities in the same order up to floating-point reassociation.
"""
import numpy as np

from ._accel import njit, resolve_backend

# ---------------------------------------------------------------------------
# symmetric tridiagonal inverse: recursions


@njit
def _tridiag_recursions_loop(alpha, beta, guard):
    n = alpha.size
    S = np.empty(max(n - 1, 0))
    d = np.empty(n)
    if n == 1:
        if abs(alpha[0]) <= guard:
            return S, d, 0
        d[0] = 1.0 / alpha[0]
        return S, d, -1
    # pivots q[k] = alpha_k + beta_k S_k (q[n-1] = alpha_{n-1})
    q = np.empty(n)
    q[n - 1] = alpha[n - 1]
    if abs(q[n - 1]) <= guard:
        return S, d, n - 1
    S[n - 2] = -beta[n - 2] / q[n - 1]
    for k in range(n - 3, -1, -1):
        q[k + 1] = alpha[k + 1] + S[k + 1] * beta[k + 1]
        if abs(q[k + 1]) <= guard:
            return S, d, k + 1
        S[k] = -beta[k] / q[k + 1]
    q[0] = alpha[0] + beta[0] * S[0]
    if abs(q[0]) <= guard:
        return S, d, 0
    d[0] = 1.0 / q[0]
    for i in range(n - 1):
        d[i + 1] = (1.0 - beta[i] * d[i] * S[i]) / q[i + 1]
    return S, d, -1


def _tridiag_recursions_py(alpha, beta, guard):
    # sequential by nature; the numpy twin is a plain Python loop over floats
    a = alpha.tolist()
    b = beta.tolist()
    n = len(a)
    S = [0.0] * max(n - 1, 0)
    d = [0.0] * n
    if n == 1:
        if abs(a[0]) <= guard:
            return np.array(S), np.array(d), 0
        return np.array(S), np.array([1.0 / a[0]]), -1
    q = [0.0] * n
    q[n - 1] = a[n - 1]
    if abs(q[n - 1]) <= guard:
        return np.array(S), np.array(d), n - 1
    S[n - 2] = -b[n - 2] / q[n - 1]
    for k in range(n - 3, -1, -1):
        q[k + 1] = a[k + 1] + S[k + 1] * b[k + 1]
        if abs(q[k + 1]) <= guard:
            return np.array(S), np.array(d), k + 1
        S[k] = -b[k] / q[k + 1]
    q[0] = a[0] + b[0] * S[0]
    if abs(q[0]) <= guard:
        return np.array(S), np.array(d), 0
    d[0] = 1.0 / q[0]
    for i in range(n - 1):
        d[i + 1] = (1.0 - b[i] * d[i] * S[i]) / q[i + 1]
    return np.array(S), np.array(d), -1


def tridiag_recursions(alpha, beta, guard, backend=None):
    """Backward sequence ``S`` and inverse diagonal ``d``.

    Returns ``(S, d, bad)`` where ``bad`` is the index of the first pivot
    whose magnitude is <= ``guard`` (``-1`` when all pivots are usable).
    """
    alpha = np.ascontiguousarray(alpha, dtype=float)
    beta = np.ascontiguousarray(beta, dtype=float)
    if resolve_backend(backend) == "numba":
        return _tridiag_recursions_loop(alpha, beta, float(guard))
    return _tridiag_recursions_py(alpha, beta, float(guard))


@njit
def _dominant_recursions_loop(beta, excess):
    n = excess.size
    S = np.empty(max(n - 1, 0))
    d = np.empty(n)
    # backward pivots u_k = e_k + beta_{k-1}, excess e_k = delta_k + beta_k e_{k+1} / u_{k+1}
    e = np.empty(n)
    u = np.empty(n)
    e[n - 1] = excess[n - 1]
    u[n - 1] = e[n - 1] + (beta[n - 2] if n > 1 else 0.0)
    for k in range(n - 2, -1, -1):
        r = beta[k] / u[k + 1]
        S[k] = r
        e[k] = excess[k] + beta[k] * (e[k + 1] / u[k + 1])
        u[k] = e[k] + (beta[k - 1] if k > 0 else 0.0)
    # forward excess g_k = delta_k + beta_{k-1} g_{k-1} / f_{k-1}, pivot f_k = g_k + beta_k
    g_prev = 0.0
    f_prev = 1.0
    for i in range(n):
        g = excess[i] + (beta[i - 1] * (g_prev / f_prev) if i > 0 else 0.0)
        f = g + (beta[i] if i < n - 1 else 0.0)
        denom = g + (beta[i] * (e[i + 1] / u[i + 1]) if i < n - 1 else 0.0)
        if denom <= 0.0:
            return S, d, i
        d[i] = -1.0 / denom
        g_prev = g
        f_prev = f
    return S, d, -1


def _dominant_recursions_py(beta, excess):
    b = beta.tolist()
    x = excess.tolist()
    n = len(x)
    S = [0.0] * max(n - 1, 0)
    d = [0.0] * n
    e = [0.0] * n
    u = [0.0] * n
    e[n - 1] = x[n - 1]
    u[n - 1] = e[n - 1] + (b[n - 2] if n > 1 else 0.0)
    for k in range(n - 2, -1, -1):
        S[k] = b[k] / u[k + 1]
        e[k] = x[k] + b[k] * (e[k + 1] / u[k + 1])
        u[k] = e[k] + (b[k - 1] if k > 0 else 0.0)
    g_prev, f_prev = 0.0, 1.0
    for i in range(n):
        g = x[i] + (b[i - 1] * (g_prev / f_prev) if i > 0 else 0.0)
        f = g + (b[i] if i < n - 1 else 0.0)
        denom = g + (b[i] * (e[i + 1] / u[i + 1]) if i < n - 1 else 0.0)
        if denom <= 0.0:
            return np.array(S), np.array(d), i
        d[i] = -1.0 / denom
        g_prev, f_prev = g, f
    return np.array(S), np.array(d), -1


def dominant_recursions(beta, excess, backend=None):
    """``S`` and ``d`` for ``K = -(M-matrix)`` given by its row excesses.

    ``K`` has off-diagonal ``beta > 0`` and diagonal
    ``alpha_i = -(excess_i + beta_{i-1} + beta_i)`` with ``excess >= 0``.
    Every pivot and every inverse diagonal entry is then a sum of positive
    terms, so no subtraction can cancel and the entries of ``K^-1`` come out
    with small relative error however ill-conditioned ``K`` is.
    """
    beta = np.ascontiguousarray(beta, dtype=float)
    excess = np.ascontiguousarray(excess, dtype=float)
    if resolve_backend(backend) == "numba":
        return _dominant_recursions_loop(beta, excess)
    return _dominant_recursions_py(beta, excess)


# ---------------------------------------------------------------------------
# symmetric tridiagonal inverse: dense-free apply, one element at a time


@njit(fastmath=True)
def _inverse_apply_ratio_loop(T, d, rhs):
    # K^-1[i, j] = d_i T_{j-1} / T_{i-1} for i < j, symmetric below.
    n = d.size
    out = np.empty(n)
    Tm = np.empty(n)  # Tm[i] = T_{i-1}, with T_{-1} = 1
    Tm[0] = 1.0
    for i in range(1, n):
        Tm[i] = T[i - 1]
    e = np.empty(n)  # e[j] = d_j / T_{j-1}
    for j in range(n):
        e[j] = d[j] / Tm[j]
    for i in range(n):
        upper = 0.0
        for j in range(i + 1, n):
            upper += e[i] * Tm[j] * rhs[j]
        lower = 0.0
        for j in range(i):
            lower += Tm[i] * e[j] * rhs[j]
        out[i] = d[i] * rhs[i] + upper + lower
    return out


@njit
def _inverse_apply_product_loop(S, d, rhs):
    # same elements built as running products of S (no T ratios)
    n = d.size
    out = np.empty(n)
    for i in range(n):
        acc = d[i] * rhs[i]
        r = d[i]
        for j in range(i + 1, n):
            r *= S[j - 1]
            acc += r * rhs[j]
        r = 1.0
        for j in range(i - 1, -1, -1):
            r *= S[j]
            acc += d[j] * r * rhs[j]
        out[i] = acc
    return out


def _inverse_apply_ratio_np(T, d, rhs):
    n = d.size
    Tm = np.concatenate(([1.0], T))
    e = d / Tm
    out = np.empty(n)
    for i in range(n):
        upper = np.dot(e[i] * Tm[i + 1:], rhs[i + 1:])
        lower = np.dot(Tm[i] * e[:i], rhs[:i])
        out[i] = d[i] * rhs[i] + upper + lower
    return out


def _inverse_apply_product_np(S, d, rhs):
    n = d.size
    out = np.empty(n)
    for i in range(n):
        up = d[i] * np.cumprod(S[i:]) if i < n - 1 else np.empty(0)
        low = d[:i] * np.cumprod(S[:i][::-1])[::-1] if i > 0 else np.empty(0)
        out[i] = d[i] * rhs[i] + np.dot(up, rhs[i + 1:]) + np.dot(low, rhs[:i])
    return out


# |T| range in which the ratio form is trusted
T_SAFE = 1e-280


def partial_products(S):
    return np.cumprod(S) if S.size else np.empty(0)


def inverse_apply(S, T, d, rhs, backend=None):
    """``K^-1 @ rhs`` evaluated element by element in O(n^2).

    Uses the partial-product ratios ``T_{j-1}/T_{i-1}`` while every ``|T|``
    stays inside ``[1e-280, 1e280]`` and running products of ``S`` otherwise.
    """
    S = np.ascontiguousarray(S, dtype=float)
    T = np.ascontiguousarray(T, dtype=float)
    d = np.ascontiguousarray(d, dtype=float)
    rhs = np.ascontiguousarray(rhs, dtype=float)
    absT = np.abs(T)
    use_ratio = T.size == 0 or (absT.min() >= T_SAFE and absT.max() <= 1.0 / T_SAFE)
    if resolve_backend(backend) == "numba":
        if use_ratio:
            return _inverse_apply_ratio_loop(T, d, rhs)
        return _inverse_apply_product_loop(S, d, rhs)
    if use_ratio:
        return _inverse_apply_ratio_np(T, d, rhs)
    return _inverse_apply_product_np(S, d, rhs)


# ---------------------------------------------------------------------------
# piecewise-linear coupling: one backward pass


@njit
def _backward_sum_loop(c, r, cq):
    n = c.size
    out = np.empty(n)
    acc = 0.0
    for k in range(n - 1, -1, -1):
        acc += r[k] - c[k] * cq
        out[k] = -acc
    return out


def _backward_sum_np(c, r, cq):
    return -np.cumsum((r - c * cq)[::-1])[::-1]


def backward_sum(c, r, cq, backend=None):
    """Solve ``D x = r - c * cq`` for the upper bidiagonal D = [-1, +1].

    ``D^-1`` is upper triangular with every entry -1, so the answer is the
    negated reversed partial sum of the right-hand side.
    """
    c = np.ascontiguousarray(c, dtype=float)
    r = np.ascontiguousarray(r, dtype=float)
    if resolve_backend(backend) == "numba":
        return _backward_sum_loop(c, r, float(cq))
    return _backward_sum_np(c, r, float(cq))


# ---------------------------------------------------------------------------
# multicolour SOR on a CSR matrix


@njit
def _sor_sweep_loop(indptr, indices, data, diag, b, x, omega, color_ptr, rows):
    change = 0.0
    for c in range(color_ptr.size - 1):
        for t in range(color_ptr[c], color_ptr[c + 1]):
            k = rows[t]
            s = b[k]
            for p in range(indptr[k], indptr[k + 1]):
                s -= data[p] * x[indices[p]]
            dx = omega * s / diag[k]
            x[k] += dx
            if abs(dx) > change:
                change = abs(dx)
    return change


def _sor_sweep_np(blocks, diag, b, x, omega, color_ptr, rows):
    change = 0.0
    for c, block in enumerate(blocks):
        sel = rows[color_ptr[c]:color_ptr[c + 1]]
        dx = omega * (b[sel] - block @ x) / diag[sel]
        x[sel] += dx
        if dx.size:
            change = max(change, float(np.max(np.abs(dx))))
    return change


class SORSweeper:
    """Colour-ordered SOR sweeps for a sparse system ``A x = b``.

    Rows of one colour never reference each other, so updating a colour in
    one vectorised step (numpy) or row by row (numba) gives the same iterate.
    """

    def __init__(self, A, colors, backend=None):
        A = A.tocsr()
        A.sort_indices()
        self.A = A
        self.backend = resolve_backend(backend)
        colors = np.asarray(colors)
        order = np.argsort(colors, kind="stable")
        counts = np.bincount(colors, minlength=int(colors.max()) + 1 if colors.size else 0)
        self.rows = order.astype(np.int64)
        self.color_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self._indptr = A.indptr.astype(np.int64)
        self._indices = A.indices.astype(np.int64)
        self.diag = A.diagonal().copy()
        if np.any(self.diag == 0):
            raise ValueError("zero diagonal entry; SOR is undefined")
        if self.backend == "numpy":
            self.blocks = [A[self.rows[self.color_ptr[c]:self.color_ptr[c + 1]]]
                           for c in range(self.color_ptr.size - 1)]

    def sweep(self, x, b, omega):
        """One in-place sweep over all colours; returns max |update|."""
        if self.backend == "numba":
            return _sor_sweep_loop(self._indptr, self._indices, self.A.data, self.diag, b, x, float(omega),
                                   self.color_ptr, self.rows)
        return _sor_sweep_np(self.blocks, self.diag, b, x, omega, self.color_ptr, self.rows)
