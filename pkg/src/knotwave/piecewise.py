"""Compactly supported piecewise polynomials with closed-form inner products.

A ``PiecewisePoly`` stores a strictly increasing breakpoint array and, for
every interval between consecutive breakpoints, the Legendre coefficients of
the piece in the local coordinate s = (2x - x0 - x1) / (x1 - x0).  In that
basis the L2 inner product of two pieces on a common interval of width h is
``h * sum_k a_k b_k / (2k + 1)``, which is exact up to rounding and well
conditioned for every degree used here.  Monomial helpers are provided for
construction and inspection.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly

from . import kernels
from .errors import InvalidIntervalError

MERGE_RTOL = 1e-12
ZERO_RTOL = 1e-13


class Polynomial:
    """Polynomial in the monomial basis, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[float] = ()):
        c = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=float).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def __call__(self, x):
        if self.is_zero():
            return np.zeros_like(np.asarray(x, dtype=float))
        return nppoly.polyval(x, self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a = self.coeffs if len(self.coeffs) else np.zeros(1)
        b = other.coeffs if len(other.coeffs) else np.zeros(1)
        return Polynomial(nppoly.polyadd(a, b))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero() or other.is_zero():
                return Polynomial()
            return Polynomial(nppoly.polymul(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def compose_affine(self, shift: float, slope: float) -> "Polynomial":
        """Return x -> p(shift + slope * x)."""
        if self.is_zero():
            return Polynomial()
        lin = np.array([shift, slope])
        out = np.zeros(1)
        for c in self.coeffs[::-1]:
            out = nppoly.polyadd(nppoly.polymul(out, lin), [c])
        return Polynomial(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"


def monomial_to_legendre(coeffs, u: float, v: float) -> np.ndarray:
    """Legendre coefficients in the local coordinate of [u, v] of a global polynomial."""
    p = Polynomial(coeffs).compose_affine(0.5 * (u + v), 0.5 * (v - u))
    if p.is_zero():
        return np.zeros(1)
    return npleg.poly2leg(p.coeffs)


class PiecewisePoly:
    """A function equal to one polynomial per interval and zero elsewhere.

    ``coeffs[i]`` holds the Legendre coefficients of the piece on
    ``[breakpoints[i], breakpoints[i + 1]]`` in its local coordinate.
    The zero function has no breakpoints.
    """

    __slots__ = ("breakpoints", "coeffs")

    def __init__(self, breakpoints, coeffs):
        bp = np.array(breakpoints, dtype=float).ravel()
        c = np.array(coeffs, dtype=float)
        if bp.size == 0:
            c = np.zeros((0, max(c.shape[-1] if c.ndim == 2 else 1, 1)))
        else:
            c = c.reshape(bp.size - 1, -1) if c.size else np.zeros((bp.size - 1, 1))
            if bp.size < 2:
                raise InvalidIntervalError("a nonzero function needs at least two breakpoints")
            if not np.all(np.diff(bp) > 0):
                raise InvalidIntervalError("breakpoints must be strictly increasing")
        bp.setflags(write=False)
        c.setflags(write=False)
        self.breakpoints = bp
        self.coeffs = c

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls) -> "PiecewisePoly":
        return cls([], np.zeros((0, 1)))

    @classmethod
    def from_local_monomials(cls, breakpoints, pieces: Sequence[Sequence[float]]) -> "PiecewisePoly":
        """Build from monomial coefficients in the local variable u in [0, 1] of each piece."""
        bp = np.asarray(breakpoints, dtype=float)
        if len(pieces) != bp.size - 1:
            raise ValueError("need one coefficient list per interval")
        legs = [monomial_to_legendre(p, 0.0, 1.0) for p in pieces]
        width = max(len(c) for c in legs)
        out = np.zeros((len(legs), width))
        for i, c in enumerate(legs):
            out[i, : len(c)] = c
        return cls(bp, out)

    @classmethod
    def from_polynomials(cls, breakpoints, pieces: Sequence) -> "PiecewisePoly":
        """Build from polynomials written in the global variable x, one per interval."""
        bp = np.asarray(breakpoints, dtype=float)
        if len(pieces) != bp.size - 1:
            raise ValueError("need one polynomial per interval")
        legs = []
        for i, p in enumerate(pieces):
            c = p.coeffs if isinstance(p, Polynomial) else p
            legs.append(monomial_to_legendre(c, bp[i], bp[i + 1]))
        width = max(len(c) for c in legs)
        out = np.zeros((len(legs), width))
        for i, c in enumerate(legs):
            out[i, : len(c)] = c
        return cls(bp, out)

    @classmethod
    def indicator(cls, u: float, v: float, value: float = 1.0) -> "PiecewisePoly":
        if not u < v:
            raise InvalidIntervalError(f"empty interval [{u}, {v}]")
        return cls([u, v], [[value]])

    # -- queries ----------------------------------------------------------

    @property
    def n_pieces(self) -> int:
        return self.coeffs.shape[0]

    @property
    def ncoef(self) -> int:
        return self.coeffs.shape[1]

    def is_zero(self) -> bool:
        return self.n_pieces == 0 or not np.any(self.coeffs)

    @property
    def support(self):
        """Closed support hull (first, last breakpoint) or None for zero."""
        if self.n_pieces == 0:
            return None
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def degree(self) -> int:
        if self.is_zero():
            return -1
        nz = np.flatnonzero(np.any(self.coeffs != 0, axis=0))
        return int(nz[-1])

    def piece(self, i: int) -> Polynomial:
        """Piece ``i`` as a polynomial in the global variable x."""
        x0, x1 = self.breakpoints[i], self.breakpoints[i + 1]
        local = npleg.leg2poly(self.coeffs[i])
        return Polynomial(local).compose_affine(-(x0 + x1) / (x1 - x0), 2.0 / (x1 - x0))

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return add(self, other)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return add(self, scale(other, -1.0))

    def __neg__(self) -> "PiecewisePoly":
        return scale(self, -1.0)

    def __mul__(self, c: float) -> "PiecewisePoly":
        return scale(self, c)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "PiecewisePoly":
        return scale(self, 1.0 / c)

    def __repr__(self) -> str:
        if self.n_pieces == 0:
            return "PiecewisePoly(zero)"
        return f"PiecewisePoly(support={self.support}, pieces={self.n_pieces}, degree={self.degree})"


# ---------------------------------------------------------------------------
# grids and stacks


def _scale_of(arrays) -> float:
    m = 1.0
    for a in arrays:
        if a.size:
            m = max(m, float(np.max(np.abs(a))), float(a[-1] - a[0]))
    return m


def merge_breakpoints(arrays: Sequence[np.ndarray], rtol: float = MERGE_RTOL) -> np.ndarray:
    """Sorted union of breakpoint arrays, fusing points closer than ``rtol * scale``."""
    arrays = [np.asarray(a, dtype=float) for a in arrays if len(a)]
    if not arrays:
        return np.zeros(0)
    allpts = np.sort(np.concatenate(arrays))
    tol = rtol * _scale_of(arrays)
    keep = np.concatenate(([True], np.diff(allpts) > tol))
    return allpts[keep]


class Stack:
    """Several functions expressed on one shared breakpoint grid.

    ``coeffs`` has shape (n_functions, n_pieces, n_coef).  ``embedded()``
    returns coordinates in which the L2 inner product is the Euclidean one.
    """

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: np.ndarray, coeffs: np.ndarray):
        self.grid = grid
        self.coeffs = coeffs

    @classmethod
    def of(cls, functions: Sequence[PiecewisePoly], grid=None, ncoef: int | None = None) -> "Stack":
        functions = list(functions)
        if grid is None:
            grid = merge_breakpoints([f.breakpoints for f in functions])
        if ncoef is None:
            ncoef = max([f.ncoef for f in functions] + [1])
        npiece = max(grid.size - 1, 0)
        out = np.zeros((len(functions), npiece, ncoef))
        for i, f in enumerate(functions):
            if f.n_pieces == 0 or npiece == 0:
                continue
            c = f.coeffs
            if c.shape[1] < ncoef:
                c = np.pad(c, ((0, 0), (0, ncoef - c.shape[1])))
            out[i] = kernels.rebase(np.ascontiguousarray(c), f.breakpoints, grid)
        return cls(grid, out)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.grid)

    def weights(self) -> np.ndarray:
        k = np.arange(self.coeffs.shape[2])
        return self.widths[:, None] / (2 * k + 1)[None, :]

    def embedded(self) -> np.ndarray:
        n = self.coeffs.shape[0]
        return (self.coeffs * np.sqrt(self.weights())[None]).reshape(n, -1)

    @classmethod
    def from_embedded(cls, grid: np.ndarray, rows: np.ndarray, ncoef: int) -> "Stack":
        npiece = grid.size - 1
        w = np.sqrt(np.diff(grid)[:, None] / (2 * np.arange(ncoef) + 1)[None, :])
        coeffs = rows.reshape(rows.shape[0], npiece, ncoef) / w[None]
        return cls(grid, coeffs)

    def functions(self, normalized: bool = True) -> list[PiecewisePoly]:
        out = []
        for c in self.coeffs:
            f = PiecewisePoly(self.grid, c) if self.grid.size else PiecewisePoly.zero()
            out.append(normalize(f) if normalized else f)
        return out


# ---------------------------------------------------------------------------
# operations


def evaluate(f: PiecewisePoly, x):
    """Values of f at x; zero outside the support, left limit at the last breakpoint."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if f.n_pieces == 0:
        vals = np.zeros_like(xa)
    else:
        vals = kernels.evaluate(np.ascontiguousarray(f.coeffs[None]), f.breakpoints, np.ascontiguousarray(xa.ravel()))[0]
        vals = vals.reshape(xa.shape)
    if np.ndim(x) == 0:
        return float(vals[0])
    return vals


eval = evaluate  # noqa: A001 - name used by callers mirroring the maths


def evaluate_many(functions: Sequence[PiecewisePoly], x) -> np.ndarray:
    """Sample a list of functions on the points x; returns shape (len(functions), len(x))."""
    x = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
    if not functions:
        return np.zeros((0, x.size))
    st = Stack.of(functions)
    if st.grid.size < 2:
        return np.zeros((len(functions), x.size))
    return kernels.evaluate(np.ascontiguousarray(st.coeffs), st.grid, x)


def gram_matrix(F: Sequence[PiecewisePoly], G: Sequence[PiecewisePoly] | None = None) -> np.ndarray:
    """Matrix of inner products <F_i, G_j>."""
    F = list(F)
    G = F if G is None else list(G)
    if not F or not G:
        return np.zeros((len(F), len(G)))
    grid = merge_breakpoints([f.breakpoints for f in F] + [g.breakpoints for g in G])
    if grid.size < 2:
        return np.zeros((len(F), len(G)))
    ncoef = max(f.ncoef for f in F + G)
    sf = Stack.of(F, grid, ncoef)
    sg = sf if G is F else Stack.of(G, grid, ncoef)
    w = sf.weights()
    alo, ahi = kernels.piece_ranges(sf.coeffs)
    blo, bhi = kernels.piece_ranges(sg.coeffs)
    out = kernels.gram(sf.coeffs, sg.coeffs, w, alo, ahi, blo, bhi)
    if G is F:
        out = 0.5 * (out + out.T)
    return out


def inner_product(f: PiecewisePoly, g: PiecewisePoly) -> float:
    """Exact L2 inner product of two piecewise polynomials."""
    return float(gram_matrix([f], [g])[0, 0])


def norm(f: PiecewisePoly) -> float:
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def scale(f: PiecewisePoly, c: float) -> PiecewisePoly:
    if c == 0 or f.n_pieces == 0:
        return PiecewisePoly.zero()
    return PiecewisePoly(f.breakpoints, f.coeffs * float(c))


def linear_combination(coeffs: Sequence[float], functions: Sequence[PiecewisePoly]) -> PiecewisePoly:
    """Return sum_i coeffs[i] * functions[i]."""
    coeffs = np.asarray(coeffs, dtype=float)
    functions = list(functions)
    if len(coeffs) != len(functions):
        raise ValueError("coefficient count does not match function count")
    live = [(c, f) for c, f in zip(coeffs, functions) if c != 0 and f.n_pieces]
    if not live:
        return PiecewisePoly.zero()
    st = Stack.of([f for _, f in live])
    c = np.tensordot(np.array([c for c, _ in live]), st.coeffs, axes=1)
    return normalize(PiecewisePoly(st.grid, c))


def add(f: PiecewisePoly, g: PiecewisePoly) -> PiecewisePoly:
    return linear_combination([1.0, 1.0], [f, g])


def transform(f: PiecewisePoly, scale_x: float, shift: float, amplitude: float = 1.0) -> PiecewisePoly:
    """Return x -> amplitude * f((x - shift) / scale_x) for scale_x > 0."""
    if not scale_x > 0:
        raise InvalidIntervalError("dilation factor must be positive")
    if f.n_pieces == 0:
        return PiecewisePoly.zero()
    return PiecewisePoly(shift + scale_x * f.breakpoints, f.coeffs * float(amplitude))


def translate(f: PiecewisePoly, mu: float) -> PiecewisePoly:
    """Return f(. - mu)."""
    return transform(f, 1.0, mu)


def compose_affine(f: PiecewisePoly, a: float, a_plus: float) -> PiecewisePoly:
    """Return f o sigma where sigma maps a to 0 and a_plus to 1."""
    if not a < a_plus:
        raise InvalidIntervalError(f"need a < a_plus, got [{a}, {a_plus}]")
    return transform(f, a_plus - a, a)


def restrict(f: PiecewisePoly, u: float, v: float) -> PiecewisePoly:
    """Return f * indicator of [u, v]."""
    if not u < v:
        raise InvalidIntervalError(f"need u < v, got [{u}, {v}]")
    if f.n_pieces == 0:
        return f
    lo = max(u, f.breakpoints[0])
    hi = min(v, f.breakpoints[-1])
    if not lo < hi:
        return PiecewisePoly.zero()
    grid = merge_breakpoints([f.breakpoints, np.array([lo, hi])])
    grid = grid[(grid >= lo - MERGE_RTOL * _scale_of([grid])) & (grid <= hi + MERGE_RTOL * _scale_of([grid]))]
    if grid.size < 2:
        return PiecewisePoly.zero()
    c = kernels.rebase(np.ascontiguousarray(f.coeffs), f.breakpoints, grid)
    return normalize(PiecewisePoly(grid, c))


def normalize(f: PiecewisePoly, rtol: float = ZERO_RTOL) -> PiecewisePoly:
    """Canonical form: trim zero end pieces and trailing zero coefficients, merge equal neighbours."""
    if f.n_pieces == 0:
        return f
    c = np.array(f.coeffs)
    peak = np.max(np.abs(c))
    if peak == 0:
        return PiecewisePoly.zero()
    tiny = np.abs(c) <= rtol * peak
    live = ~np.all(tiny, axis=1)
    idx = np.flatnonzero(live)
    first, last = idx[0], idx[-1]
    bp = f.breakpoints[first : last + 2]
    c = c[first : last + 1]
    cols = np.flatnonzero(np.any(np.abs(c) > rtol * peak, axis=0))
    c = c[:, : cols[-1] + 1]
    bp, c = _merge_equal_pieces(bp, c, rtol * peak)
    return PiecewisePoly(bp, c)


def _merge_equal_pieces(bp, c, atol):
    if c.shape[0] < 2:
        return bp, c
    keep_bp = [bp[0]]
    pieces = [c[0]]
    starts = [bp[0]]
    for i in range(1, c.shape[0]):
        x0, x1, x2 = starts[-1], bp[i], bp[i + 1]
        h = x1 - x0
        mat = kernels.shift_matrices(np.array([(x0 + x2 - x0 - x1) / h]), np.array([(x2 - x0) / h]), c.shape[1])[0]
        # the left piece continued over [x0, x2] must agree with both halves
        ext = mat @ pieces[-1]
        left = kernels.rebase(np.ascontiguousarray(ext[None]), np.array([x0, x2]), np.array([x0, x1, x2]))
        if np.all(np.abs(left[1] - c[i]) <= atol) and np.all(np.abs(ext) <= 1e6 * max(np.max(np.abs(pieces[-1])), atol)):
            pieces[-1] = ext
            continue
        keep_bp.append(x1)
        starts.append(x1)
        pieces.append(c[i])
    keep_bp.append(bp[-1])
    return np.array(keep_bp), np.array(pieces)


def sample_table(functions: Sequence[PiecewisePoly], lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform sample grid over [lo, hi] and the values of every function on it."""
    x = np.linspace(lo, hi, n)
    return x, evaluate_many(functions, x)


def r() -> PiecewisePoly:
    """x on [0, 1]."""
    return PiecewisePoly([0.0, 1.0], [[0.5, 0.5]])


def l() -> PiecewisePoly:  # noqa: E743 - matches the mathematical name
    """1 - x on [0, 1]."""
    return PiecewisePoly([0.0, 1.0], [[0.5, -0.5]])


def quad_bump() -> PiecewisePoly:
    """4x(1 - x) on [0, 1], the quadratic bump of height one."""
    return PiecewisePoly.from_local_monomials([0.0, 1.0], [[0.0, 4.0, -4.0]])
