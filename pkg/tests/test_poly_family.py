import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import eval_gegenbauer

from helpers import IRREGULAR, random_window, two_sided
from knotwave import poly_family as pf
from knotwave.centered import verify_centered, verify_orth_condition
from knotwave.errors import ContractError
from knotwave.knots import ENDPOINT, KnotWindow
from knotwave.linalg import gram
from knotwave.mra_wavelet import build_scaffold, build_wavelets
from knotwave.piecewise import evaluate, inner_product, l, r


@pytest.mark.parametrize("i", range(0, 8))
def test_monic_ultraspherical_matches_scipy(i):
    # oracle: scipy's Gegenbauer C_i^(5/2), divided by its leading coefficient
    lead = 2**i * math.gamma(2.5 + i) / (math.gamma(2.5) * math.factorial(i))
    s = np.linspace(-1, 1, 13)
    assert np.allclose(pf.ultraspherical_monic(i)(s), eval_gegenbauer(i, 2.5, s) / lead, atol=1e-13)


@pytest.mark.parametrize("n", range(2, 9))
def test_closed_forms_against_quadrature(n):
    phi = pf.phi_tilde(n)
    f = lambda x: evaluate(phi, x)  # noqa: E731
    assert quad(lambda x: f(x) ** 2, 0, 1, epsabs=0, epsrel=1e-13)[0] == pytest.approx(pf.phi_tilde_norm_sq(n), rel=1e-10)
    assert quad(lambda x: x * f(x), 0, 1, epsabs=0, epsrel=1e-13)[0] == pytest.approx(pf.r_phi_tilde(n), rel=1e-10)


def test_phi_tilde_family_is_orthogonal():
    phis = [pf.phi_tilde(i) for i in range(2, 12)]
    g = gram(phis)
    assert np.max(np.abs(g - np.diag(np.diag(g)))) < 1e-15


@pytest.mark.parametrize("n", range(1, 9))
def test_family_invariants(n):
    fam = pf.build_family(n)
    assert abs(pf.alpha_quadratic(n, fam.alpha_n)) < 1e-13
    assert fam.alpha_n > 0
    assert abs(inner_product(fam.r_n_proj, fam.l_n_proj)) < 1e-13
    lam = fam.lam
    assert np.max(np.abs(gram([fam.r_n_proj, fam.l_n_proj], lam))) < 1e-13
    # symmetry x -> 1 - x swaps r and l
    x = np.linspace(0, 1, 7)
    assert np.allclose(evaluate(fam.r_n_proj, x), evaluate(fam.l_n_proj, 1 - x), atol=1e-13)


def test_invalid_degrees():
    with pytest.raises(ContractError):
        pf.build_family(0)
    with pytest.raises(ContractError):
        pf.phi_tilde(1)


@pytest.mark.parametrize("n", range(1, 7))
def test_omega_basis_is_centered_and_orthonormal(n):
    w = KnotWindow(IRREGULAR, ENDPOINT, ENDPOINT)
    B = pf.omega_basis(pf.build_family(n), w)
    assert B.orthonormal
    assert verify_centered(B).passed and verify_orth_condition(B).passed
    # interior groups: one bar, n breve (z plus phi_2..phi_n); the end intervals add the half hat
    assert [len(b) for b in B.bar] == [0] + [1] * (len(w) - 2) + [0]
    assert len(B.breve[1]) == n and len(B.breve[0]) == n + 1 and len(B.breve[len(w) - 2]) == n + 1


def test_omega_reproduces_polynomials_of_degree_n():
    w = KnotWindow((0.0, 0.5, 1.7, 2.0), ENDPOINT, ENDPOINT)
    B = pf.omega_basis(pf.build_family(3), w)
    from knotwave.piecewise import PiecewisePoly, Polynomial

    cubic = PiecewisePoly.from_polynomials([0.0, 2.0], [Polynomial([1.0, -2.0, 0.5, 0.3])])
    from knotwave.linalg import span_residual

    assert span_residual([cubic], B.functions()) < 1e-12


@settings(max_examples=6)
@given(st.integers(0, 2**31), st.sampled_from([2, 3]))
def test_closed_form_wavelets_match_generic(seed, n):
    w = random_window(np.random.default_rng(seed), 4, 6)
    phi0 = pf.omega_basis(pf.build_family(n), w)
    phi1 = pf.omega_basis(pf.build_family(n + 3), w)
    psi = build_wavelets(build_scaffold(phi0, phi1))
    cf = pf.poly_wavelets(n, w)
    assert cf.orthonormal
    for i in range(len(w)):
        assert two_sided(psi.bar[i], cf.bar[i]) < 1e-8
        assert two_sided(psi.breve[i], cf.breve[i]) < 1e-8
    fs = cf.functions()
    assert np.allclose(gram(fs), np.eye(len(fs)), atol=1e-10)
    assert np.max(np.abs(gram(fs, phi0.functions()))) < 1e-10


def test_delta_space_contract():
    with pytest.raises(ContractError):
        pf.delta_space(pf.build_family(2), pf.build_family(4))
    d = pf.delta_space(pf.build_family(2), pf.build_family(5))
    assert np.max(np.abs(gram(d, pf.build_family(2).lam))) < 1e-13
    assert abs(inner_product(r(), l())) > 0
