"""Wavelets on the golden-mean lattice τ^{-k} Z_τ^+.

Two ladders are provided: the piecewise-constant τ-Haar bases and the
continuous piecewise-quadratic bases Ω with constant θ = 1/τ.  Both are
stationary up to τ-integer translation: every group at a knot a > 0 is the
group at β(a) ∈ {1, τ, τ²} shifted by μ(a) = a - β(a), and level k is level 0
dilated by τ^k.  The quadratic wavelets are given in closed form from the
representatives at 0, 1, τ, τ², and also obtained from the generic
construction for cross-checking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .centered import CenteredBasis, regroup
from .errors import ConsistencyError, ContractError
from .knots import CUT, ENDPOINT, LONG, ONE, TAU, TAU_N, ZERO, KnotWindow, TauNumber, beta_mu, classify, tau_integers_upto, tau_power
from .linalg import gram, orthogonal_complement_in, orthonormalize, residual, span_residual
from .piecewise import PiecewisePoly, evaluate_many, inner_product, linear_combination, norm, restrict, scale, transform, translate
from .quad_family import nesting_hypothesis, omega

THETA = 1.0 / TAU
DEFAULT_TOP = tau_power(7)
SIGN_NOTE = (
    "values are inner products of the normalized bases; each function's sign makes its first "
    "significant Legendre coefficient (scanning pieces left to right) positive, so entries may "
    "differ in sign from tables produced under another convention"
)


def lattice_window(level: int, top: TauNumber = DEFAULT_TOP, right_role: str = CUT) -> KnotWindow:
    """Knots of τ^{-level} Z_τ^+ in [0, top]; ``top`` must be a nonnegative τ-integer."""
    top = TauNumber.of(top)
    ex = tau_integers_upto(top.times_tau_power(level))
    return KnotWindow.from_tau(ex, level, ENDPOINT, right_role)


def knot_index(window: KnotWindow, a: TauNumber) -> int:
    """Index of an exact knot (given in the window's level units)."""
    if window.exact is None:
        raise ContractError("window has no exact knots")
    a = TauNumber.of(a)
    for i, x in enumerate(window.exact):
        if x == a:
            return i
    raise ContractError(f"{a} is not a knot of the window")


@dataclass(frozen=True)
class TauBasisLevel:
    k: int
    basis: CenteredBasis
    family: str

    @property
    def window(self) -> KnotWindow:
        return self.basis.window


# ---------------------------------------------------------------------------
# τ-Haar


def haar_basis(window: KnotWindow) -> CenteredBasis:
    """Normalized indicators of the intervals; "phi1" on long gaps, "phi2" on short ones."""
    k = window.array
    n = len(k)
    breve, names = [[] for _ in range(n)], [[] for _ in range(n)]
    for i in range(n - 1):
        h = k[i + 1] - k[i]
        breve[i] = [PiecewisePoly.indicator(k[i], k[i + 1], 1.0 / math.sqrt(h))]
        long_gap = window.exact is None or window.exact[i + 1] - window.exact[i] == LONG
        names[i] = ["phi1" if long_gap else "phi2"]
    return CenteredBasis(window, [[] for _ in range(n)], breve, True, None, names)


def haar_level(k: int, top: TauNumber = DEFAULT_TOP) -> TauBasisLevel:
    return TauBasisLevel(k, haar_basis(lattice_window(k, top)), "haar")


def haar_psi() -> PiecewisePoly:
    """ψ = τ^{-1/2} χ_[0,1/τ] - τ^{1/2} χ_[1/τ,1]."""
    return PiecewisePoly.indicator(0.0, 1.0 / TAU, TAU**-0.5) - PiecewisePoly.indicator(1.0 / TAU, 1.0, TAU**0.5)


def haar_wavelets(k: int, top: TauNumber = DEFAULT_TOP) -> CenteredBasis:
    """Ψ^k: τ^{k/2} ψ(τ^k x - b) at every knot whose right gap is long."""
    w = lattice_window(k, top)
    psi = haar_psi()
    n = len(w)
    breve = [[] for _ in range(n)]
    for i in range(n - 1):
        if w.exact[i + 1] - w.exact[i] == LONG:
            breve[i] = [transform(psi, TAU**-k, w.array[i], TAU ** (k / 2))]
    names = [["psi"] * len(g) for g in breve]
    return CenteredBasis(w, [[] for _ in range(n)], breve, True, None, names)


# ---------------------------------------------------------------------------
# continuous piecewise-quadratic ladder


def quad_tau_level(k: int, top: TauNumber = DEFAULT_TOP) -> TauBasisLevel:
    """Normalized Ω on τ^{-k} Z_τ^+ with θ ≡ 1/τ; groups are ordered (bar, q, z)."""
    w = lattice_window(k, top)
    return TauBasisLevel(k, omega(w, THETA), "quad")


def level_pair(family: str, k: int = 0, top: TauNumber = DEFAULT_TOP) -> tuple[TauBasisLevel, TauBasisLevel]:
    """Levels k and k+1 of a family over the same stretch of the half line."""
    make = {"haar": haar_level, "quad": quad_tau_level}.get(family)
    if make is None:
        raise ContractError(f"unknown tau family {family!r}")
    lo, hi = make(k, top), make(k + 1, top)
    if family == "quad" and not nesting_hypothesis(lo.window, THETA, hi.window, THETA):
        raise ConsistencyError("lattice levels fail the quadratic nesting condition")
    return lo, hi


@dataclass(frozen=True)
class QuadRepresentatives:
    """Closed-form wavelets at the class representatives 0, 1, τ, τ² (level 0)."""

    w_hat: dict
    w_tilde: PiecewisePoly
    w_breve_tau: PiecewisePoly
    w_breve_tau2: PiecewisePoly
    w_breve_0: tuple
    f_plus: dict
    f_minus: dict


def _unit(f: PiecewisePoly) -> PiecewisePoly:
    return orthonormalize([f])[0]


def quad_representatives(phi0: CenteredBasis, phi1: CenteredBasis) -> QuadRepresentatives:
    """Build ŵ_1, ŵ_τ, ŵ_τ², w̃_τ², w̆_τ, w̆_τ², w̆_{0,1}, w̆_{0,2} from level-0 and regrouped level-1 bases."""
    w = phi0.window
    k = w.array
    reps = {"1": ONE, "tau": TAU_N, "tau2": tau_power(2)}
    w_hat, t, f_plus, f_minus = {}, {}, {}, {}
    for key, a in list(reps.items()) + [("1+tau2", ONE + tau_power(2))]:
        i = knot_index(w, a)
        b0, b1 = phi0.bar[i][0], phi1.bar[i][0]
        w_hat[key] = _unit(b1 - inner_product(b1, b0) * b0)
        t[key] = b0 - inner_product(b0, b1) * b1
        right, left = restrict(t[key], k[i], k[i + 1]), restrict(t[key], k[i - 1], k[i])
        f_plus[key] = _unit(right) if norm(right) > 1e-9 else None
        f_minus[key] = _unit(left) if norm(left) > 1e-9 else None
    w_hat.pop("1+tau2")

    i2 = knot_index(w, tau_power(2))
    s = restrict(t["tau2"], k[i2], k[i2 + 1]) - restrict(t["tau2"], k[i2 - 1], k[i2])
    b0 = phi0.bar[i2][0]
    w_tilde = _unit(s - inner_product(s, b0) * b0 - inner_product(s, w_hat["tau2"]) * w_hat["tau2"])

    it = knot_index(w, TAU_N)
    seed = transform(phi0.bar[knot_index(w, ONE + tau_power(2))][0], 1.0 / TAU, 0.0)
    against = [f_plus["tau"]] + list(phi0.breve[it]) + [f_minus["tau2"]]
    w_breve_tau = _unit(residual(seed, against))
    w_breve_tau2 = translate(w_breve_tau, 1.0)

    w01 = translate(w_breve_tau, -TAU)
    extra = orthogonal_complement_in(list(phi1.breve[0]), list(phi0.breve[0]) + [f_minus["1"], w01])
    if len(extra) != 1:
        raise ConsistencyError(f"expected one more short wavelet at 0, found {len(extra)}")
    return QuadRepresentatives(w_hat, w_tilde, w_breve_tau, w_breve_tau2, (w01, extra[0]), f_plus, f_minus)


def quad_tau_wavelets(top: TauNumber = DEFAULT_TOP) -> CenteredBasis:
    """Closed-form Ψ on the level-0 window: representatives translated by μ(a)."""
    lo, hi = level_pair("quad", 0, top)
    phi0 = lo.basis
    phi1 = regroup(hi.basis, phi0.window)
    reps = quad_representatives(phi0, phi1)
    w = phi0.window
    n = len(w)
    groups = {
        ONE: ([reps.w_hat["1"]], [], ["what"], []),
        TAU_N: ([reps.w_hat["tau"]], [reps.w_breve_tau], ["what"], ["wbreve"]),
        tau_power(2): ([reps.w_hat["tau2"], reps.w_tilde], [reps.w_breve_tau2], ["what", "wtilde"], ["wbreve"]),
    }
    bar, breve, bn, vn = [], [], [], []
    for i, a in enumerate(w.exact):
        if a == ZERO:
            bar.append([]), breve.append(list(reps.w_breve_0)), bn.append([]), vn.append(["wbreve_0_1", "wbreve_0_2"])
            continue
        if i == n - 1 and w.right_role == CUT:
            bar.append([]), breve.append([]), bn.append([]), vn.append([])
            continue
        beta, mu, _ = beta_mu(a)
        gb, gv, nb, nv = groups[beta]
        m = float(mu)
        bar.append([translate(f, m) for f in gb])
        breve.append([translate(f, m) for f in gv])
        bn.append(list(nb))
        vn.append(list(nv))
    return CenteredBasis(w, bar, breve, True, bn, vn)


# ---------------------------------------------------------------------------
# stationarity checks


def _group_distance(F, G, mode: str) -> float:
    if len(F) != len(G):
        return math.inf
    if not F:
        return 0.0
    if mode == "span":
        return max(span_residual(F, G), span_residual(G, F))
    return max(norm(f - g) for f, g in zip(F, G))


def translation_residual(B: CenteredBasis, mode: str = "elementwise", trusted_only: bool = True) -> float:
    """max over knots a > τ² of the distance between Φ_a and Φ_{β(a)}(· - μ(a)).

    Works for any basis on a level-0 lattice window; with ``mode="span"`` the
    groups are compared as spans instead of function by function.
    """
    w = B.window
    if w.exact is None or w.level != 0:
        raise ContractError("translation check needs a level-0 lattice window")
    worst = 0.0
    for i, a in enumerate(w.exact):
        if not a > tau_power(2) or (trusted_only and not w.trusted(i)) or i == len(w) - 1:
            continue
        beta, mu, _ = beta_mu(a)
        j = knot_index(w, beta)
        m = float(mu)
        for F, G in ((B.bar[i], B.bar[j]), (B.breve[i], B.breve[j])):
            worst = max(worst, _group_distance(list(F), [translate(g, m) for g in G], mode))
    return worst


def scale_residual(level: CenteredBasis, base: CenteredBasis, k: int) -> float:
    """max distance between level-k groups Φ^k_b and τ^{k/2} Φ_{τ^k b}(τ^k ·) from a level-0 basis."""
    wl, w0 = level.window, base.window
    worst = 0.0
    index0 = {x: j for j, x in enumerate(w0.exact)}
    for i, e in enumerate(wl.exact):
        j = index0.get(e)
        if j is None or not wl.trusted(i) or not w0.trusted(j):
            continue
        for F, G in ((level.bar[i], base.bar[j]), (level.breve[i], base.breve[j])):
            G = [transform(g, TAU**-k, 0.0, TAU ** (k / 2)) for g in G]
            worst = max(worst, _group_distance(list(F), G, "elementwise"))
    return worst


# ---------------------------------------------------------------------------
# C / D tables

TABLE_PAIRS = (
    (ZERO, ZERO),
    (ZERO, ONE),
    (ONE, ZERO),
    (ONE, ONE),
    (ONE, TAU_N),
    (TAU_N, tau_power(2)),
    (TAU_N, ONE + tau_power(2)),
    (tau_power(2), tau_power(2)),
    (tau_power(2), ONE + tau_power(2)),
    (tau_power(2), tau_power(3)),
    (tau_power(2), ONE + tau_power(3)),
)


def _knot_class(a: TauNumber) -> str:
    return "0" if a == ZERO else classify(a).value


def cd_tables(phi0: CenteredBasis, phi1_level: CenteredBasis, psi: CenteredBasis) -> list[dict]:
    """C_{a,a'} = <Φ_a, Φ_{1,a'}> and D_{a,a'} = <Ψ_a, Φ_{1,a'}> for the representative pairs.

    ``phi1_level`` is the level-1 basis on its own knots, so Φ_{1,a'} is its
    group at the knot a'/τ (stored exactly as a' in level-1 units).
    """
    out = []
    w0, w1 = phi0.window, phi1_level.window
    for kind, rows in (("c", phi0), ("d", psi)):
        for a, ap in TABLE_PAIRS:
            i, j = knot_index(w0, a), knot_index(w1, ap)
            F = rows.group(i)
            G = phi1_level.group(j)
            vals = gram(F, G) if F and G else np.zeros((len(F), len(G)))
            out.append({
                "knot_class": _knot_class(a),
                "kind": kind,
                "a": str(a),
                "a_prime": str(ap),
                "row_labels": list(rows.bar_names[i]) + list(rows.breve_names[i]),
                "col_labels": list(phi1_level.bar_names[j]) + list(phi1_level.breve_names[j]),
                "values": [[float(v) for v in r] for r in vals],
            })
    return out


def table_reconstruction_residual(tables: list[dict], phi0: CenteredBasis, phi1_level: CenteredBasis, psi: CenteredBasis) -> float:
    """Rebuild Φ_a and Ψ_a at τ² (whose tables cover every contributing fine group) from the tables."""
    w0, w1 = phi0.window, phi1_level.window
    worst = 0.0
    for kind, rows in (("c", phi0), ("d", psi)):
        for a in (tau_power(2),):
            parts = [t for t in tables if t["kind"] == kind and t["a"] == str(a)]
            F = rows.group(knot_index(w0, a))
            acc = [PiecewisePoly.zero() for _ in F]
            for t in parts:
                j = next(jj for jj, x in enumerate(w1.exact) if str(x) == t["a_prime"])
                G = phi1_level.group(j)
                vals = np.array(t["values"]).reshape(len(F), len(G))
                acc = [f + linear_combination(row, G) for f, row in zip(acc, vals)]
            worst = max(worst, max((norm(f - g) for f, g in zip(F, acc)), default=0.0))
    return worst


def table_matrix(tables: list[dict]) -> np.ndarray:
    """Stack the C then D rows of every representative over the union of fine columns.

    Columns are keyed by (a', position in the fine group) in first-seen order.
    Orthonormal rows mean the tables form part of an orthogonal M.
    """
    cols: dict = {}
    for t in tables:
        for j in range(len(t["col_labels"])):
            cols.setdefault((t["a_prime"], j), len(cols))
    blocks = []
    for a in dict.fromkeys(t["a"] for t in tables):
        for kind in ("c", "d"):
            parts = [t for t in tables if t["a"] == a and t["kind"] == kind]
            nr = len(parts[0]["row_labels"]) if parts else 0
            R = np.zeros((nr, len(cols)))
            for t in parts:
                v = np.array(t["values"]).reshape(nr, -1)
                for j in range(v.shape[1]):
                    R[:, cols[(t["a_prime"], j)]] = v[:, j]
            blocks.append(R)
    return np.vstack(blocks)


def sample_matches(F, G, points: np.ndarray) -> float:
    """Max abs difference between two function lists on sample points, allowing a sign flip per function."""
    if len(F) != len(G):
        return math.inf
    if not F:
        return 0.0
    a, b = evaluate_many(list(F), points), evaluate_many(list(G), points)
    return float(max(min(np.max(np.abs(x - y)), np.max(np.abs(x + y))) for x, y in zip(a, b)))
