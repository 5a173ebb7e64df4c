import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_window
from knotwave import quad_family as qf
from knotwave.errors import ContractError, DomainError
from knotwave.knots import ENDPOINT, KnotWindow
from knotwave.linalg import gram
from knotwave.mra_wavelet import check_nested
from knotwave.piecewise import evaluate

thetas = st.floats(0.01, 0.99)


def test_discriminant_identity_symbolically():
    # oracle: sympy expands the discriminant of the coefficient polynomials
    t = sp.symbols("t")
    s = 1 - t
    c0 = 5 * (4 - 5 * s**2 * t**2 * (15 + s * t))
    c1 = -20 * (2 + t * (9 + 13 * t * (2 * t - 3)))
    c2 = 4 * (1 + 45 * s * t)
    assert sp.expand(c1**2 - 4 * c2 * c0 - 80 * (4 - 15 * s**2 * t**2) ** 2) == 0
    for tv in (0.1, 0.37, 0.5, 0.9):
        got = qf.imra_coefficients(tv)
        want = [float(e.subs(t, tv)) for e in (c0, c1, c2)]
        assert np.allclose(got, want, rtol=1e-14)


@given(thetas)
def test_roots_match_numpy(theta):
    c0, c1, c2 = qf.imra_coefficients(theta)
    want = np.sort(np.roots([c2, c1, c0]).real)
    got = np.sort(qf.c_roots(theta))
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


def test_half_roots():
    plus, minus = qf.c_roots(0.5)
    assert plus == pytest.approx(math.sqrt(5) / 8, abs=1e-15)
    assert minus == pytest.approx(-math.sqrt(5) / 8, abs=1e-15)


@given(thetas, st.sampled_from(["+", "-"]))
def test_local_system_is_orthogonal(theta, branch):
    loc = qf.quad_local(theta, branch)
    g = gram([loc.r_theta, loc.l_theta, loc.q, loc.z_theta])
    assert np.max(np.abs(g - np.diag(np.diag(g)))) < 1e-12
    # r^θ(0) = 0, r^θ(1) = 1 and l^θ mirrors it; z vanishes at both ends
    assert evaluate(loc.r_theta, 1.0) == pytest.approx(1.0) and abs(evaluate(loc.r_theta, 0.0)) < 1e-12
    assert evaluate(loc.l_theta, 0.0) == pytest.approx(1.0) and abs(evaluate(loc.l_theta, 1.0)) < 1e-12
    assert abs(evaluate(loc.z_theta, 0.0)) < 1e-12 and abs(evaluate(loc.z_theta, 1.0)) < 1e-12


@given(thetas)
def test_z_has_breakpoint_at_theta(theta):
    loc = qf.quad_local(theta)
    assert np.any(np.isclose(loc.z_theta.breakpoints, theta))
    assert np.max(np.abs(gram([loc.z_theta], qf.u_functions(theta)[:1]))) > 0


@pytest.mark.parametrize("bad", [0.0, 1.0, 1.2, -0.3])
def test_theta_domain(bad):
    with pytest.raises(DomainError):
        qf.quad_local(bad)


def test_theta_sequence():
    w = KnotWindow((0.0, 1.0, 2.0, 3.5), ENDPOINT, ENDPOINT)
    assert qf.theta_sequence(w, 0.3) == (0.3, 0.3, 0.3)
    with pytest.raises(ContractError):
        qf.theta_sequence(w, (0.3, 0.4))
    assert np.allclose(qf.b_points(w, (0.5, 0.25, 0.5)), [0.5, 1.25, 2.75])


@settings(max_examples=10)
@given(st.integers(0, 2**31))
def test_b_point_refinement_is_nested(seed):
    rng = np.random.default_rng(seed)
    w0 = random_window(rng, 4, 6)
    t0 = tuple(rng.uniform(0.1, 0.9, len(w0) - 1))
    w1 = qf.insert_b_points(w0, t0)
    t1 = tuple(rng.uniform(0.1, 0.9, len(w1) - 1))  # any fine theta works
    assert qf.nesting_hypothesis(w0, t0, w1, t1)
    assert check_nested(qf.omega(w0, t0), qf.omega(w1, t1)) < 1e-9


def test_nesting_report_names_the_failed_clause():
    w0 = KnotWindow((0.0, 1.0, 2.0, 3.0), ENDPOINT, ENDPOINT)
    w1 = KnotWindow((0.0, 0.3, 1.0, 2.0, 3.0), ENDPOINT, ENDPOINT)
    rep = qf.nesting_report(w0, 0.5, w1, 0.5)
    assert not rep and "subdivided" in rep.failures[0]
    rep2 = qf.nesting_report(w0, 0.5, w0, 0.4)
    assert not rep2 and "not a fine b-point" in rep2.failures[0]
    with pytest.raises(ContractError):
        qf.nesting_report(w0, 0.5, KnotWindow((0.0, 1.5, 3.0)), 0.5)
    assert qf.nesting_hypothesis(w0, 0.5, qf.midpoint_refinement(w0), 0.5)
