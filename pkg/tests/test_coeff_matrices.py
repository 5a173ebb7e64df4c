import numpy as np
import pytest

from helpers import IRREGULAR, g_spans_worst, m_worst, poly_pair, quad_pair, sparsity_worst, two_sided
from knotwave.coeff_matrices import (
    alpha_functions, assemble_M, be_factor, c_blocks, c_row, d_blocks, e_row, ghat_gtilde, row_span_residual,
)
from knotwave.errors import ContractError
from knotwave.knots import ENDPOINT, KnotWindow
from knotwave.mra_wavelet import build_scaffold, build_wavelets


def _setup(kind):
    if kind == "poly":
        phi0, phi1 = poly_pair(2)
    else:
        phi0, phi1 = quad_pair(KnotWindow(IRREGULAR, ENDPOINT, ENDPOINT), (0.3, 0.5, 0.7, 0.4, 0.6, 0.5))
    sc = build_scaffold(phi0, phi1)
    return phi0, sc.phi1, build_wavelets(sc), sc


@pytest.fixture(scope="module", params=["poly", "quad"])
def setup(request):
    return _setup(request.param)


def test_be_factor(setup):
    phi0, phi1, _, _ = setup
    for i in range(len(phi0.window)):
        for t in (i - 1, i):
            if t < 0:
                continue
            blk = c_blocks(phi0, phi1, i)[("bar", "breve", t)]
            e, b = be_factor(blk)
            if blk.is_empty:
                continue
            assert np.allclose(e.matrix @ b.matrix, blk.matrix, atol=1e-13)
            assert np.allclose(b.matrix @ b.matrix.T, np.eye(b.shape[0]), atol=1e-13)
            assert len(alpha_functions(b, phi1)) == b.shape[0]
    with pytest.raises(ContractError):
        be_factor(c_blocks(phi0, phi1, 1)[("bar", "bar", 1)])


def test_c_and_e_rows_are_orthonormal(setup):
    phi0, phi1, _, _ = setup
    for i in range(1, len(phi0.window) - 1):
        for R in (c_row(phi0, phi1, i), e_row(phi0, phi1, i)):
            assert np.allclose(R @ R.T, np.eye(R.shape[0]), atol=1e-12)


def test_M_is_orthogonal_and_sparse(setup):
    phi0, phi1, psi, _ = setup
    worst, count = m_worst(phi0, phi1, psi)
    assert count > 0 and worst < 1e-10
    assert sparsity_worst(phi0, phi1, psi) < 1e-10


def test_M_needs_three_knots(setup):
    phi0, phi1, psi, _ = setup
    with pytest.raises(ContractError):
        assemble_M(phi0, phi1, psi, 1, 2)
    with pytest.raises(ContractError):
        assemble_M(phi0, phi1, psi, 0, len(phi0.window))


def test_ghat_gtilde_span_the_long_wavelets(setup):
    _, _, _, sc = setup
    worst, count = g_spans_worst(sc)
    assert count > 0 and worst < 1e-8


def test_d_blocks_have_wavelet_labels(setup):
    phi0, phi1, psi, _ = setup
    blk = d_blocks(psi, phi1, 2)[("breve", "breve", 2)]
    assert all(x.startswith("wbreve") for x in blk.row_labels)
    js = blk.to_json("x")
    assert js["kind"] == "d" and np.array(js["values"]).shape == blk.shape


def test_ghat_empty_at_edges(setup):
    phi0, phi1, _, _ = setup
    gh, gt = ghat_gtilde(phi0, phi1, 0)
    assert gh.size == 0 and gt.size == 0


def test_row_span_residual():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(3, 6))
    assert row_span_residual(A, rng.normal(size=(3, 3)) @ A) < 1e-12
    assert row_span_residual(A, rng.normal(size=(3, 6))) > 1e-3
    assert row_span_residual(np.zeros((0, 0)), np.zeros((0, 0))) == 0.0
    assert row_span_residual(A, np.zeros((0, 6))) == 1.0
    assert two_sided([], []) == 0.0
