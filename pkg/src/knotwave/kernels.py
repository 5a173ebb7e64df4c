"""Inner loops over per-piece Legendre coefficients.

Every piece of a piecewise polynomial is stored as Legendre coefficients in
the local coordinate s in [-1, 1].  Three kernels do the heavy lifting:

* ``shift_matrices`` builds the matrices that re-express a Legendre series
  under the substitution s -> alpha + beta*t, used to move coefficients onto a
  refined breakpoint grid.
* ``evaluate`` samples many functions at many points.
* ``gram`` forms inner products of coefficient stacks that share a grid.

Each kernel has a numba version (explicit loops) and a vectorised numpy
version.  ``USE_NUMBA`` picks the exported binding; both stay importable via
``IMPLEMENTATIONS`` so tests and the benchmark can compare them.
"""
import numpy as np

from ._jit import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# numpy versions


def _shift_matrices_numpy(alpha, beta, ncoef):
    m = alpha.shape[0]
    out = np.zeros((m, ncoef, ncoef))
    out[:, 0, 0] = 1.0
    if ncoef == 1:
        return out
    out[:, 0, 1] = alpha
    out[:, 1, 1] = beta
    a = alpha[:, None]
    b = beta[:, None]
    for j in range(1, ncoef - 1):
        cur = out[:, :, j]
        xc = np.zeros_like(cur)
        # t * P_k = ((k + 1) P_{k+1} + k P_{k-1}) / (2k + 1)
        k = np.arange(ncoef)
        up = cur[:, :-1] * ((k[:-1] + 1) / (2 * k[:-1] + 1))
        down = cur[:, 1:] * (k[1:] / (2 * k[1:] + 1))
        xc[:, 1:] += up
        xc[:, :-1] += down
        out[:, :, j + 1] = ((2 * j + 1) * (a * cur + b * xc) - j * out[:, :, j - 1]) / (j + 1)
    return out


def _rebase_numpy(coeffs, src, dst):
    npiece, ncoef = coeffs.shape
    mid = 0.5 * (dst[:-1] + dst[1:])
    idx = np.searchsorted(src, mid, side="right") - 1
    inside = (idx >= 0) & (idx < npiece)
    out = np.zeros((dst.shape[0] - 1, ncoef))
    if not inside.any():
        return out
    j = idx[inside]
    x0 = src[j]
    x1 = src[j + 1]
    u = dst[:-1][inside]
    v = dst[1:][inside]
    h = x1 - x0
    alpha = (u + v - x0 - x1) / h
    beta = (v - u) / h
    mats = _shift_matrices_numpy(alpha, beta, ncoef)
    out[inside] = np.einsum("qkj,qj->qk", mats, coeffs[j])
    return out


def _legendre_vander_numpy(t, ncoef):
    v = np.empty((t.shape[0], ncoef))
    v[:, 0] = 1.0
    if ncoef > 1:
        v[:, 1] = t
    for k in range(1, ncoef - 1):
        v[:, k + 1] = ((2 * k + 1) * t * v[:, k] - k * v[:, k - 1]) / (k + 1)
    return v


def _evaluate_numpy(coeffs, breaks, x):
    nfun, npiece, ncoef = coeffs.shape
    idx = np.searchsorted(breaks, x, side="right") - 1
    idx = np.where(x == breaks[-1], npiece - 1, idx)
    inside = (idx >= 0) & (idx < npiece) & (x >= breaks[0]) & (x <= breaks[-1])
    out = np.zeros((nfun, x.shape[0]))
    if not inside.any():
        return out
    j = idx[inside]
    x0 = breaks[j]
    x1 = breaks[j + 1]
    t = (2.0 * x[inside] - x0 - x1) / (x1 - x0)
    v = _legendre_vander_numpy(t, ncoef)
    out[:, inside] = np.einsum("fsk,sk->fs", coeffs[:, j, :], v)
    return out


def _gram_numpy(a, b, weights, alo, ahi, blo, bhi):
    na = a.shape[0]
    nb = b.shape[0]
    lhs = (a * weights[None]).reshape(na, -1)
    return lhs @ b.reshape(nb, -1).T


# ---------------------------------------------------------------------------
# numba versions


@njit
def _shift_matrix_loop(alpha, beta, ncoef, out):
    for i in range(ncoef):
        for j in range(ncoef):
            out[i, j] = 0.0
    out[0, 0] = 1.0
    if ncoef == 1:
        return
    out[0, 1] = alpha
    out[1, 1] = beta
    xc = np.empty(ncoef)
    for j in range(1, ncoef - 1):
        for k in range(ncoef):
            xc[k] = 0.0
        for k in range(j + 1):
            c = out[k, j]
            if k + 1 < ncoef:
                xc[k + 1] += c * (k + 1) / (2 * k + 1)
            if k > 0:
                xc[k - 1] += c * k / (2 * k + 1)
        for k in range(ncoef):
            out[k, j + 1] = ((2 * j + 1) * (alpha * out[k, j] + beta * xc[k]) - j * out[k, j - 1]) / (j + 1)


@njit
def _shift_matrices_numba(alpha, beta, ncoef):
    m = alpha.shape[0]
    out = np.empty((m, ncoef, ncoef))
    for i in range(m):
        _shift_matrix_loop(alpha[i], beta[i], ncoef, out[i])
    return out


@njit
def _rebase_numba(coeffs, src, dst):
    npiece = coeffs.shape[0]
    ncoef = coeffs.shape[1]
    nout = dst.shape[0] - 1
    out = np.zeros((nout, ncoef))
    mat = np.empty((ncoef, ncoef))
    j = 0
    for q in range(nout):
        u = dst[q]
        v = dst[q + 1]
        mid = 0.5 * (u + v)
        if mid < src[0] or mid >= src[npiece]:
            continue
        while j + 1 < npiece and src[j + 1] <= mid:
            j += 1
        while j > 0 and src[j] > mid:
            j -= 1
        x0 = src[j]
        x1 = src[j + 1]
        h = x1 - x0
        _shift_matrix_loop((u + v - x0 - x1) / h, (v - u) / h, ncoef, mat)
        for k in range(ncoef):
            s = 0.0
            for i in range(k, ncoef):
                s += mat[k, i] * coeffs[j, i]
            out[q, k] = s
    return out


@njit
def _evaluate_numba(coeffs, breaks, x):
    nfun = coeffs.shape[0]
    npiece = coeffs.shape[1]
    ncoef = coeffs.shape[2]
    ns = x.shape[0]
    out = np.zeros((nfun, ns))
    v = np.empty(ncoef)
    for s in range(ns):
        xs = x[s]
        if xs < breaks[0] or xs > breaks[npiece]:
            continue
        j = np.searchsorted(breaks, xs, side="right") - 1
        if j >= npiece:
            j = npiece - 1
        x0 = breaks[j]
        x1 = breaks[j + 1]
        t = (2.0 * xs - x0 - x1) / (x1 - x0)
        v[0] = 1.0
        if ncoef > 1:
            v[1] = t
        for k in range(1, ncoef - 1):
            v[k + 1] = ((2 * k + 1) * t * v[k] - k * v[k - 1]) / (k + 1)
        for f in range(nfun):
            acc = 0.0
            for k in range(ncoef):
                acc += coeffs[f, j, k] * v[k]
            out[f, s] = acc
    return out


@njit
def _gram_numba(a, b, weights, alo, ahi, blo, bhi):
    na = a.shape[0]
    nb = b.shape[0]
    ncoef = a.shape[2]
    out = np.zeros((na, nb))
    for i in range(na):
        for j in range(nb):
            lo = max(alo[i], blo[j])
            hi = min(ahi[i], bhi[j])
            acc = 0.0
            for p in range(lo, hi):
                for k in range(ncoef):
                    acc += weights[p, k] * a[i, p, k] * b[j, p, k]
            out[i, j] = acc
    return out


IMPLEMENTATIONS = {
    "numpy": {
        "shift_matrices": _shift_matrices_numpy,
        "rebase": _rebase_numpy,
        "evaluate": _evaluate_numpy,
        "gram": _gram_numpy,
    },
    "numba": {
        "shift_matrices": _shift_matrices_numba,
        "rebase": _rebase_numba,
        "evaluate": _evaluate_numba,
        "gram": _gram_numba,
    },
}

BACKEND = "numba" if USE_NUMBA else "numpy"
shift_matrices = IMPLEMENTATIONS[BACKEND]["shift_matrices"]
rebase = IMPLEMENTATIONS[BACKEND]["rebase"]
evaluate = IMPLEMENTATIONS[BACKEND]["evaluate"]
gram = IMPLEMENTATIONS[BACKEND]["gram"]


def piece_ranges(coeffs):
    """First and one-past-last nonzero piece of every function in a stack."""
    nz = np.any(coeffs != 0.0, axis=2)
    n, p = nz.shape
    lo = np.where(nz.any(axis=1), nz.argmax(axis=1), 0).astype(np.int64)
    hi = np.where(nz.any(axis=1), p - nz[:, ::-1].argmax(axis=1), 0).astype(np.int64)
    return lo, hi
