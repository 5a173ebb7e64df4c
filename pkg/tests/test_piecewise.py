import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from knotwave.errors import InvalidIntervalError
from knotwave.piecewise import (
    PiecewisePoly,
    Polynomial,
    evaluate,
    evaluate_many,
    gram_matrix,
    inner_product,
    l,
    linear_combination,
    norm,
    quad_bump,
    r,
    restrict,
    sample_table,
    transform,
    translate,
)

coef = st.floats(-3, 3, allow_nan=False)


@st.composite
def piecewise(draw, max_pieces=4, max_deg=4):
    n = draw(st.integers(1, max_pieces))
    start = draw(st.floats(-3, 3))
    widths = draw(st.lists(st.floats(0.2, 2.0), min_size=n, max_size=n))
    bp = np.concatenate([[start], start + np.cumsum(widths)])
    pieces = [draw(st.lists(coef, min_size=1, max_size=max_deg + 1)) for _ in range(n)]
    return PiecewisePoly.from_local_monomials(bp, pieces), bp, pieces


def _mono_eval(bp, pieces, x):
    """Oracle: evaluate local monomials directly (u in [0, 1] per interval)."""
    out = 0.0
    for i, p in enumerate(pieces):
        a, b = bp[i], bp[i + 1]
        if a <= x < b or (i == len(pieces) - 1 and x == b):
            u = (x - a) / (b - a)
            return float(np.polynomial.polynomial.polyval(u, p))
    return out


def _quad_ip(f, g):
    pts = np.union1d(f.breakpoints, g.breakpoints)
    if pts.size < 2:
        return 0.0
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += quad(lambda x: evaluate(f, x) * evaluate(g, x), a, b, epsabs=1e-13, epsrel=1e-13)[0]
    return total


@given(piecewise(), st.floats(0, 1))
def test_evaluation_matches_monomials(fp, t):
    f, bp, pieces = fp
    x = bp[0] + t * (bp[-1] - bp[0])
    assert evaluate(f, x) == pytest.approx(_mono_eval(bp, pieces, x), abs=1e-10, rel=1e-10)


@given(piecewise(), piecewise())
def test_inner_product_matches_quadrature(fp, gp):
    f, g = fp[0], gp[0]
    want = _quad_ip(f, g)
    assert inner_product(f, g) == pytest.approx(want, abs=1e-9, rel=1e-9)


@given(piecewise(), piecewise(), coef, coef)
def test_inner_product_bilinear_and_symmetric(fp, gp, a, b):
    f, g = fp[0], gp[0]
    h = linear_combination([a, b], [f, g])
    assert inner_product(f, g) == pytest.approx(inner_product(g, f), abs=1e-12)
    lhs = inner_product(h, f)
    rhs = a * inner_product(f, f) + b * inner_product(g, f)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(rhs)))


@given(piecewise())
def test_gram_is_positive_semidefinite(fp):
    f = fp[0]
    G = gram_matrix([f, translate(f, 0.3), transform(f, 2.0, 0.1)])
    assert np.min(np.linalg.eigvalsh(G)) > -1e-10


@given(piecewise(), st.floats(0.05, 0.95))
def test_restrict_splits_the_norm(fp, t):
    f, bp, _ = fp
    m = bp[0] + t * (bp[-1] - bp[0])
    left, right = restrict(f, bp[0] - 1, m), restrict(f, m, bp[-1] + 1)
    assert norm(f) ** 2 == pytest.approx(norm(left) ** 2 + norm(right) ** 2, rel=1e-10, abs=1e-12)
    x = np.linspace(bp[0], bp[-1], 41)
    vals = evaluate_many([left], x)[0]
    assert np.all(vals[x > m + 1e-9] == 0.0)


@given(piecewise(), st.floats(0.1, 5), st.floats(-5, 5), st.floats(-3, 3))
def test_transform_scales_the_norm(fp, s, shift, amp):
    f = fp[0]
    g = transform(f, s, shift, amp)
    assert norm(g) ** 2 == pytest.approx(amp * amp * s * norm(f) ** 2, rel=1e-10, abs=1e-12)
    x = f.breakpoints[0] + 0.37 * (f.breakpoints[-1] - f.breakpoints[0])
    assert evaluate(g, shift + s * x) == pytest.approx(amp * evaluate(f, x), rel=1e-10, abs=1e-10)


def test_reference_functions():
    assert norm(r()) ** 2 == pytest.approx(1 / 3, abs=1e-15)
    assert norm(l()) ** 2 == pytest.approx(1 / 3, abs=1e-15)
    assert inner_product(r(), l()) == pytest.approx(1 / 6, abs=1e-15)
    assert norm(quad_bump()) ** 2 == pytest.approx(8 / 15, abs=1e-15)
    assert evaluate(quad_bump(), 0.5) == pytest.approx(1.0)


def test_zero_outside_support_and_no_nan():
    f = PiecewisePoly.indicator(1.0, 2.0, 3.0)
    x, vals = sample_table([f], -1.0, 4.0, 11)
    assert np.all(np.isfinite(vals))
    assert np.all(vals[0][(x < 1.0) | (x > 2.0)] == 0.0)
    assert np.all(vals[0][(x > 1.0) & (x < 2.0)] == 3.0)


def test_zero_function():
    z = PiecewisePoly.zero()
    assert z.is_zero and norm(z) == 0.0
    assert inner_product(z, r()) == 0.0
    assert evaluate(z, 0.5) == 0.0


def test_invalid_intervals():
    with pytest.raises(InvalidIntervalError):
        PiecewisePoly.indicator(1.0, 1.0)
    with pytest.raises(InvalidIntervalError):
        PiecewisePoly([0.0, 2.0, 1.0], [[1.0], [1.0]])
    with pytest.raises(InvalidIntervalError):
        restrict(r(), 0.5, 0.5)
    with pytest.raises(InvalidIntervalError):
        transform(r(), 0.0, 0.0)


def test_polynomial_helpers():
    p = Polynomial([1.0, 2.0]) * Polynomial([0.0, 1.0])
    assert p.coeffs.tolist() == [0.0, 1.0, 2.0]
    assert p(2.0) == pytest.approx(10.0)
    assert (p - p).is_zero()
    assert math.isclose(p.compose_affine(1.0, 2.0)(0.5), p(2.0))
