"""Shared builders and measurements for the test modules."""
import numpy as np

from knotwave import poly_family as pf
from knotwave import quad_family as qf
from knotwave.coeff_matrices import FLAVOURS, assemble_M, c_blocks, d_blocks, ghat_gtilde
from knotwave.knots import ENDPOINT, KnotWindow
from knotwave.linalg import gram, span_residual
from knotwave.piecewise import linear_combination

IRREGULAR = (0.0, 1.0, 2.5, 3.0, 4.2, 5.0, 6.5)


def eye_err(fs):
    if not fs:
        return 0.0
    return float(np.max(np.abs(gram(fs) - np.eye(len(fs)))))


def cross_max(F, G):
    if not F or not G:
        return 0.0
    return float(np.max(np.abs(gram(F, G))))


def two_sided(F, G):
    F, G = list(F), list(G)
    if not F and not G:
        return 0.0
    if not F or not G:
        return 1.0
    return max(span_residual(F, G), span_residual(G, F))


def random_window(rng, n_min=5, n_max=8):
    n = int(rng.integers(n_min, n_max + 1))
    gaps = rng.uniform(0.3, 2.0, n - 1)
    knots = np.concatenate([[0.0], np.cumsum(gaps)])
    return KnotWindow(tuple(np.round(knots, 6)), ENDPOINT, ENDPOINT)


def poly_pair(n, knots=IRREGULAR):
    w = KnotWindow(tuple(knots), ENDPOINT, ENDPOINT)
    return pf.omega_basis(pf.build_family(n), w), pf.omega_basis(pf.build_family(n + 3), w)


def quad_pair(w0, thetas):
    th = qf.theta_sequence(w0, thetas)
    w1 = qf.insert_b_points(w0, th)
    th1 = tuple(t for t in th for _ in range(2))
    return qf.omega(w0, th), qf.omega(w1, th1)


def m_worst(phi0, phi1, psi, max_knots=8, trusted_only=False):
    """Largest |M M^T - I| over all runs of 3..max_knots knots."""
    w = phi0.window
    n = len(w)
    worst, count = 0.0, 0
    for i0 in range(n):
        for i1 in range(i0 + 2, min(n, i0 + max_knots)):
            if trusted_only and not all(w.trusted(i) for i in range(i0, i1 + 1)):
                continue
            M = assemble_M(phi0, phi1, psi, i0, i1)
            assert M.shape[0] == M.shape[1], (i0, i1, M.shape)
            worst = max(worst, float(np.max(np.abs(M @ M.T - np.eye(len(M))))))
            count += 1
    return worst, count


def sparsity_worst(phi0, phi1, psi):
    """Largest entry of any block toward a- other than (bar, breve)."""
    worst = 0.0
    for i in range(1, len(phi0.window)):
        for blk in (c_blocks(phi0, phi1, i), d_blocks(psi, phi1, i)):
            for rf in FLAVOURS:
                for cf in FLAVOURS:
                    if (rf, cf) != ("bar", "breve"):
                        worst = max(worst, float(np.max(np.abs(blk[(rf, cf, i - 1)].matrix), initial=0.0)))
    return worst


def g_spans_worst(sc):
    """ĝ/g̃ row functions against the Ŵ/W̃ spaces of the scaffold."""
    phi0, phi1, w = sc.phi0, sc.phi1, sc.phi0.window
    worst, count = 0.0, 0
    for i in range(1, len(w)):
        if not (w.trusted(i) and phi0.bar[i]):
            continue
        gh, gt = ghat_gtilde(phi0, phi1, i)
        loc = phi1.local(i)
        for rows, target in ((gh, sc.spaces[i].W_hat), (gt, sc.spaces[i].W_tilde)):
            worst = max(worst, two_sided([linear_combination(r, loc) for r in rows], target))
            count += 1
    return worst, count
