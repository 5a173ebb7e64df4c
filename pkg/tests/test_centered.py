import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_window
from knotwave import poly_family as pf
from knotwave import quad_family as qf
from knotwave.centered import CenteredBasis, containment_residual, regroup, spline_basis, verify_centered, verify_orth_condition
from knotwave.errors import ContractError
from knotwave.knots import CUT, ENDPOINT, KnotWindow
from knotwave.piecewise import translate

W = KnotWindow((0.0, 1.0, 2.5, 3.0, 4.2), ENDPOINT, ENDPOINT)


def test_names_default_and_layout():
    B = pf.omega_basis(pf.build_family(2), W)
    assert len(B) == sum(len(b) + len(v) for b, v in zip(B.bar, B.breve))
    labelled = B.labelled()
    assert [x[4] for x in labelled] == B.functions()
    assert B.local(1) == list(B.breve[0]) + list(B.bar[1]) + list(B.breve[1])
    bare = CenteredBasis(W, B.bar, B.breve)
    assert bare.bar_names[1] == ("bar0",) and bare.breve_names[0][0] == "breve0"


def test_contract_needs_one_group_per_knot():
    with pytest.raises(ContractError):
        CenteredBasis(W, [[]] * 4, [[]] * 5)


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_spline_basis_is_centered_but_not_orthogonal(degree):
    B = spline_basis(W, degree)
    assert verify_centered(B).passed
    if degree >= 1:
        assert not verify_orth_condition(B.normalized()).passed


@settings(max_examples=10)
@given(st.integers(0, 2**31))
def test_quad_bases_on_random_windows(seed):
    rng = np.random.default_rng(seed)
    w = random_window(rng)
    B = qf.omega(w, tuple(rng.uniform(0.1, 0.9, len(w) - 1)))
    assert verify_centered(B).passed
    assert verify_orth_condition(B).passed


def test_counterexamples_are_rejected():
    good = pf.omega_basis(pf.build_family(2), W)
    moved = list(good.breve)
    moved[1] = tuple(translate(f, 1.5) for f in moved[1])
    rep = verify_centered(CenteredBasis(W, good.bar, moved, True))
    assert not rep.passed and any("leaves" in c.message for c in rep.failures)
    dup = list(good.breve)
    dup[2] = tuple(dup[2]) + (dup[2][0],)
    rep = verify_centered(CenteredBasis(W, good.bar, dup, False))
    assert any("dependent" in c.message for c in rep.failures)
    scaled = [list(g) for g in good.breve]
    scaled[0][0] = scaled[0][0] * 1.01
    rep = verify_centered(CenteredBasis(W, good.bar, scaled, True))
    assert not rep.passed and rep.failures[-1].message == "orthonormality"


def test_regroup_by_coarse_knots():
    w1 = qf.insert_b_points(W, 0.5)
    fine = qf.omega(w1, 0.5)
    coarse = qf.omega(W, 0.5)
    R = regroup(fine, W)
    assert len(R) == len(fine)
    for i in range(len(W)):
        for f in R.breve[i]:
            s0, s1 = f.support
            assert W.knots[i] - 1e-12 <= s0 and s1 <= W.knots[i + 1] + 1e-12
        for f in R.bar[i]:
            s0, s1 = f.support
            assert s0 < W.knots[i] < s1
    assert containment_residual(coarse.functions(), R.functions()) < 1e-10
    with pytest.raises(ContractError):
        regroup(fine, KnotWindow((0.0, 0.2, 0.4, 4.2)))


def test_cut_windows_have_no_breve_at_the_last_knot():
    w = KnotWindow((0.0, 1.0, 2.0, 3.0), ENDPOINT, CUT)
    B = qf.omega(w, 0.5)
    assert B.breve[-1] == () and verify_centered(B).passed
