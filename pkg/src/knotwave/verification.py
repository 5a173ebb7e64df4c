"""Invariant suites per family, shared by the command line and the tests.

Each suite returns a ``SuiteResult`` of named checks with the measured value
and the limit it was held to.  ``perturb`` scales the first coarse basis
function by (1 + perturb) before the checks run, which must make the suite
fail; it exists to confirm the harness notices broken inputs.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import poly_family as pf
from . import quad_family as qf
from . import tau_wavelets as tw
from .centered import CenteredBasis, regroup, verify_centered, verify_orth_condition
from .coeff_matrices import FLAVOURS, assemble_M, c_blocks, d_blocks, ghat_gtilde
from .knots import ENDPOINT, KnotWindow, classify, fibonacci_word, refine, tau_integers, tau_window
from .linalg import gram, span_residual
from .mra_wavelet import build_scaffold, build_wavelets, check_nested, scaffold_report
from .piecewise import inner_product, l, linear_combination, r, scale

DEFAULT_TOL = 1e-9
TOL_RANGE = (1e-14, 1e-4)
SPAN_TOL = 1e-8
DEFAULT_KNOTS = (0.0, 1.0, 2.5, 3.0, 4.2, 5.0, 6.5)


def tolerance_from_env(default: float = DEFAULT_TOL) -> float:
    """KNOTWAVE_TOL as a float clamped to [1e-14, 1e-4]; the default when unset or unparsable."""
    raw = os.environ.get("KNOTWAVE_TOL")
    if raw is None or not raw.strip():
        return default
    try:
        val = float(raw)
    except ValueError:
        return default
    if not math.isfinite(val):
        return default
    return min(max(val, TOL_RANGE[0]), TOL_RANGE[1])


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": _jsonable(self.value), "limit": self.limit}


def _jsonable(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


@dataclass
class SuiteResult:
    family: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def below(self, name: str, value: float, limit: float):
        self.checks.append(Check(name, bool(value < limit), float(value), float(limit)))

    def equal(self, name: str, got, want):
        self.checks.append(Check(name, got == want, 0.0 if got == want else 1.0, 0.0))

    def to_json(self) -> dict:
        return {"family": self.family, "passed": self.passed, "checks": [c.to_json() for c in self.checks]}

    def text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  value={c.value:.3e}  limit={c.limit:.1e}" for c in self.checks]
        lines.append(f"{self.family}: {'PASS' if self.passed else 'FAIL'} ({sum(c.passed for c in self.checks)}/{len(self.checks)})")
        return "\n".join(lines)


def perturbed(B: CenteredBasis, eps: float) -> CenteredBasis:
    """Scale the first function of the basis by (1 + eps)."""
    if not eps:
        return B
    bar = [list(g) for g in B.bar]
    breve = [list(g) for g in B.breve]
    for groups in (bar, breve):
        for g in groups:
            if g:
                g[0] = scale(g[0], 1.0 + eps)
                return CenteredBasis(B.window, bar, breve, B.orthonormal, B.bar_names, B.breve_names)
    return B


def _max_offdiag(g: np.ndarray) -> float:
    return float(np.max(np.abs(g - np.diag(np.diag(g))))) if g.size else 0.0


def _eye_err(fs) -> float:
    if not fs:
        return 0.0
    return float(np.max(np.abs(gram(fs) - np.eye(len(fs)))))


def pair_checks(res: SuiteResult, phi0: CenteredBasis, phi1: CenteredBasis, tol: float, label: str):
    """Scaffold, wavelet and coefficient-matrix checks for one nested pair; returns (scaffold, Ψ)."""
    res.below(f"{label}: Phi0 orthonormal", _eye_err(phi0.functions()), tol)
    res.below(f"{label}: Phi1 orthonormal", _eye_err(phi1.functions()), tol)
    sc = build_scaffold(phi0, phi1, validate=False)
    res.equal(f"{label}: dimension formulas", sc.dims.passed, True)
    psi = build_wavelets(sc)
    rep = scaffold_report(sc, psi, tol)
    for c in rep.checks:
        limit = tol if "orthogonal" in c.message or "orthonormal" in c.message else max(SPAN_TOL, tol)
        res.below(f"{label}: {c.message}" + (f" at knot {c.index}" if c.index >= 0 else ""), c.value, limit)
    w = phi0.window
    p1 = sc.phi1
    worst_m, worst_sparse, worst_g = 0.0, 0.0, 0.0
    n = len(w)
    for i0 in range(n):
        for i1 in range(i0 + 2, min(n, i0 + 8)):
            M = assemble_M(phi0, p1, psi, i0, i1)
            err = math.inf if M.shape[0] != M.shape[1] else float(np.max(np.abs(M @ M.T - np.eye(len(M)))))
            worst_m = max(worst_m, err)
    for i in range(1, n):
        cb, db = c_blocks(phi0, p1, i), d_blocks(psi, p1, i)
        for blk in (cb, db):
            for rf in FLAVOURS:
                for cf in FLAVOURS:
                    if (rf, cf) != ("bar", "breve"):
                        m = blk[(rf, cf, i - 1)].matrix
                        worst_sparse = max(worst_sparse, float(np.max(np.abs(m), initial=0.0)))
        if w.trusted(i) and phi0.bar[i]:
            gh, gt = ghat_gtilde(phi0, p1, i)
            loc = p1.local(i)
            sp = sc.spaces[i]
            for rows, target in ((gh, sp.W_hat), (gt, sp.W_tilde)):
                fs = [linear_combination(r, loc) for r in rows]
                if fs or target:
                    r = max(span_residual(fs, list(target)), span_residual(list(target), fs)) if fs and target else 1.0
                    worst_g = max(worst_g, r)
    res.below(f"{label}: M orthogonal on runs of 3..8 knots", worst_m, max(SPAN_TOL, tol))
    res.below(f"{label}: zero blocks of c and d toward a-", worst_sparse, 1e-10)
    res.below(f"{label}: ghat/gtilde rows span the long wavelet pieces", worst_g, max(SPAN_TOL, tol))
    return sc, psi


# ---------------------------------------------------------------------------
# families


def poly_suite(degree: int = 2, knots=DEFAULT_KNOTS, tol: float | None = None, perturb: float = 0.0) -> SuiteResult:
    tol = tolerance_from_env() if tol is None else tol
    res = SuiteResult(f"poly n={degree}")
    n = degree
    if n >= 2:
        phi = pf.phi_tilde(n)
        res.below("||phi_n||^2 closed form", abs(inner_product(phi, phi) / pf.phi_tilde_norm_sq(n) - 1), 1e-12)
        res.below("<r, phi_n> closed form", abs(inner_product(r(), phi) / pf.r_phi_tilde(n) - 1), 1e-12)
        res.below("<l, phi_n> closed form", abs(inner_product(l(), phi) / ((-1) ** n * pf.r_phi_tilde(n)) - 1), 1e-12)
    fam = pf.build_family(n, check=False)
    res.below("<r_n, l_n> closed form", abs(inner_product(fam.r_n, fam.l_n) / pf.rl_closed_form(n) - 1), 1e-12)
    res.below("alpha_n solves its quadratic", abs(pf.alpha_quadratic(n, fam.alpha_n)), 1e-12)
    res.below("<r_n, (I - P_z) l_n> = 0", abs(inner_product(fam.r_n_proj, fam.l_n_proj)), 1e-12)
    w = KnotWindow(tuple(knots), ENDPOINT, ENDPOINT)
    phi0 = perturbed(pf.omega_basis(fam, w), perturb)
    phi1 = pf.omega_basis(pf.build_family(n + 3), w)
    for name, B in (("Omega^n", phi0), ("Omega^(n+3)", phi1)):
        res.equal(f"{name} centered basis contract", verify_centered(B, tol).passed, True)
        res.below(f"{name} orthogonality condition", verify_orth_condition(B, tol).worst(), tol)
    sc, psi = pair_checks(res, phi0, phi1, tol, f"Omega^{n} in Omega^{n + 3}")
    cf = pf.poly_wavelets(n, w)
    worst = 0.0
    for i in range(len(w)):
        for F, G in ((psi.bar[i], cf.bar[i]), (psi.breve[i], cf.breve[i])):
            if F or G:
                worst = max(worst, max(span_residual(list(F), list(G)), span_residual(list(G), list(F))) if F and G else 1.0)
    res.below("generic wavelets span the closed forms per knot", worst, SPAN_TOL)
    return res


def quad_suite(theta=0.5, knots=DEFAULT_KNOTS, tol: float | None = None, perturb: float = 0.0, thetas_sample: int = 50) -> SuiteResult:
    tol = tolerance_from_env() if tol is None else tol
    res = SuiteResult("quad")
    ts = np.linspace(0.02, 0.98, thetas_sample)
    worst_imra = worst_disc = worst_gram = 0.0
    for t in ts:
        loc = qf.quad_local(t, check=False)
        c0, c1, c2 = qf.imra_coefficients(t)
        worst_imra = max(worst_imra, abs(qf.imra_residual(t, loc.c)) / max(abs(c0), abs(c1 * loc.c), abs(c2 * loc.c**2), 1.0))
        worst_disc = max(worst_disc, abs(qf.discriminant(t) / qf.discriminant_closed_form(t) - 1))
        worst_gram = max(worst_gram, _max_offdiag(gram([loc.r_theta, loc.l_theta, loc.q, loc.z_theta])))
    res.below("root of the c equation (relative residual)", worst_imra, 1e-11)
    res.below("discriminant closed form", worst_disc, 1e-10)
    res.below("{r, l, q, z} Gram diagonal", worst_gram, 1e-10)
    plus, minus = qf.c_roots(0.5)
    res.below("roots at theta = 1/2 are +-sqrt(5)/8", max(abs(plus - math.sqrt(5) / 8), abs(minus + math.sqrt(5) / 8)), 1e-12)
    w0 = KnotWindow(tuple(knots), ENDPOINT, ENDPOINT)
    w1 = qf.insert_b_points(w0, theta)
    # each coarse interval splits in two at its b-point; both halves keep its theta
    theta1 = theta if np.isscalar(theta) else tuple(t for t in theta for _ in range(2))
    res.equal("nesting condition for the b-point refinement", qf.nesting_hypothesis(w0, theta, w1, theta1), True)
    phi0 = perturbed(qf.omega(w0, theta), perturb)
    phi1 = qf.omega(w1, theta1)
    for name, B in (("Omega coarse", phi0), ("Omega fine", phi1)):
        rep = verify_centered(B, tol)
        res.equal(f"{name} centered basis contract", rep.passed, True)
        res.below(f"{name} orthogonality condition", verify_orth_condition(B, tol).worst(), tol)
    pair_checks(res, phi0, phi1, tol, "quad pair")
    return res


def tau_lattice_checks(res: SuiteResult):
    want = ["0", "1", "tau", "1+tau", "2+tau", "1+2*tau"]
    res.equal("first six tau-integers", [str(x) for x in tau_integers(6)], want)
    res.equal("21-letter Fibonacci word", fibonacci_word(21), "LSLLSLSLLSLLSLSLLSLSL")
    ok = True
    for k in range(5):
        a, b = tau_window(k, 20), tau_window(k + 1, 20)
        ok &= all(np.min(np.abs(b.array - x)) < 1e-12 * b.scale for x in a.array)
        ok &= refine(a).exact == b.exact
    res.equal("a^k contained in a^(k+1) for k = 0..4", ok, True)


def tau_haar_suite(count: int = 30, tol: float | None = None, perturb: float = 0.0) -> SuiteResult:
    tol = tolerance_from_env() if tol is None else tol
    res = SuiteResult("tau-haar")
    tau_lattice_checks(res)
    top = tau_integers(count)[-1]
    lo, hi = tw.level_pair("haar", 0, top)
    phi0 = perturbed(lo.basis, perturb)
    sc, psi = pair_checks(res, phi0, hi.basis, tol, "tau-Haar levels 0, 1")
    w = lo.window
    pattern_ok = True
    for i, a in enumerate(w.exact):
        if not w.trusted(i) or i == len(w) - 1:
            continue
        d = sc.dims.knots[i]
        want = 0 if (a.p or a.q) and classify(a).value == "LS" else 1
        pattern_ok &= d.dim_W_breve == want and d.dim_W_bar == 0
    res.equal("short wavelet count 1 on tau*Z, 0 on 1 + tau^2*Z", pattern_ok, True)
    x = np.linspace(w.array[0], w.array[-1], 4001)
    x = np.union1d(x, w.array)
    cf = tw.haar_wavelets(0, top)
    res.below("generic wavelets equal psi translates up to sign", max(tw.sample_matches(psi.breve[i], cf.breve[i], x) for i in range(len(w))), 1e-12)
    return res


def tau_quad_suite(count: int = 30, tol: float | None = None, perturb: float = 0.0) -> SuiteResult:
    tol = tolerance_from_env() if tol is None else tol
    res = SuiteResult("tau-quad")
    tau_lattice_checks(res)
    top = tau_integers(count)[-1]
    lo, hi = tw.level_pair("quad", 0, top)
    phi0 = perturbed(lo.basis, perturb)
    for k in range(3):
        B = tw.quad_tau_level(k, top).basis
        res.equal(f"level {k} centered basis contract", verify_centered(B, tol).passed, True)
        res.below(f"level {k} orthogonality condition", verify_orth_condition(B, tol).worst(), tol)
    ladder = 0.0
    for k in range(2):
        a, b = tw.quad_tau_level(k, top).basis, tw.quad_tau_level(k + 1, top).basis
        ladder = max(ladder, check_nested(a, regroup(b, a.window), tol=1.0))
    res.below("V^k in V^(k+1) for k = 0, 1", ladder, SPAN_TOL)
    sc, psi = pair_checks(res, phi0, hi.basis, tol, "tau-quad levels 0, 1")
    w = lo.window
    want = {"LS": (1, 0, 1, 0), "SL": (1, 1, 0, 1), "LL": (2, 1, 0, 0)}
    ok = True
    for i, a in enumerate(w.exact):
        if not w.trusted(i) or i == len(w) - 1:
            continue
        d = sc.dims.knots[i]
        if i == 0:
            ok &= d.dim_W_breve == 2 and d.dim_W_bar == 0
            continue
        got = (d.dim_W_bar, d.dim_W_breve, d.m_plus, d.m_minus)
        ok &= got == want[classify(a).value]
    res.equal("dimension patterns (1,1,2), (0,1,1), 2 at 0, m+ at LS, m- at SL", ok, True)
    cf = tw.quad_tau_wavelets(top)
    worst = 0.0
    for i in range(len(w)):
        if not w.trusted(i):
            continue
        for F, G in ((psi.bar[i], cf.bar[i]), (psi.breve[i], cf.breve[i])):
            if F or G:
                worst = max(worst, max(span_residual(list(F), list(G)), span_residual(list(G), list(F))) if F and G else 1.0)
    res.below("closed-form wavelets span the generic ones per knot", worst, SPAN_TOL)
    fs = cf.functions()
    res.below("closed-form wavelets orthonormal", _eye_err(fs), tol)
    res.below("closed-form wavelets orthogonal to Phi0", float(np.max(np.abs(gram(fs, phi0.functions())))), tol)
    res.below("Phi translation covariance", tw.translation_residual(phi0), 1e-10)
    res.below("Psi translation covariance", tw.translation_residual(cf), 1e-10)
    res.below("regrouped Phi1 translation covariance", tw.translation_residual(sc.phi1), 1e-10)
    # level-k knots b with tau^k b inside the level-0 window are compared
    scale_worst = max(tw.scale_residual(tw.quad_tau_level(k, top).basis, lo.basis, k) for k in (1, 2))
    res.below("scale covariance for k = 1, 2", scale_worst, 1e-10)
    tables = tw.cd_tables(phi0, hi.basis, cf)
    R = tw.table_matrix(tables)
    res.below("C/D table rows orthonormal across 0, 1, tau, tau^2", float(np.max(np.abs(R @ R.T - np.eye(len(R))))), max(SPAN_TOL, tol))
    res.below("C/D tables rebuild Phi and Psi at tau^2", tw.table_reconstruction_residual(tables, phi0, hi.basis, cf), SPAN_TOL)
    blocks = c_blocks(phi0, sc.phi1, 2)
    res.below("c_(tau,1) = 0", max(float(np.max(np.abs(blocks[(x, y, 1)].matrix), initial=0.0)) for x in FLAVOURS for y in FLAVOURS), 1e-12)
    # compare with the first knot of the same class beyond tau^2; the class
    # representative itself may border the special knot 0
    stat, first = 0.0, {}
    for i, a in enumerate(w.exact):
        if i < 4 or not w.trusted(i):
            continue
        beta = tw.beta_mu(a)[0]
        j = first.setdefault(beta, i)
        if j == i:
            continue
        for blk_fn, rows in ((c_blocks, phi0), (d_blocks, cf)):
            bi, bj = blk_fn(rows, sc.phi1, i), blk_fn(rows, sc.phi1, j)
            for (rf, cf_, t) in bi:
                other = bj[(rf, cf_, t - i + j)].matrix
                mine = bi[(rf, cf_, t)].matrix
                stat = max(stat, math.inf if mine.shape != other.shape else float(np.max(np.abs(mine - other), initial=0.0)))
    res.below("stationary c and d blocks beyond tau^2", stat, 1e-10)
    return res


SUITES = {"poly": poly_suite, "quad": quad_suite, "tau-haar": tau_haar_suite, "tau-quad": tau_quad_suite}
