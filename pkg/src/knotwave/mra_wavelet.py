"""Wavelets for a nested pair of orthonormal centered bases.

Given Φ⁰ and Φ¹ centered on the same knots with S(Φ⁰) ⊂ S(Φ¹), the wavelet
space W = S(Φ¹) ⊖ S(Φ⁰) gets an orthonormal centered basis Ψ built knot by
knot from

* A⁺_a = P_{V̆¹_a} V̄⁰_a and A⁻_a = P_{V̆¹_{a-}} V̄⁰_a
* Ŵ_a = (I - P_{V̄⁰_a}) V̄¹_a
* T_a = (I - P_{V̄¹_a}) V̄⁰_a, with T^∓_a its members supported left/right of a
* U_a = T_a ⊖ (T⁻_a ⊕ T⁺_a) and S_a = (χ_{[a,a+]} - χ_{[a-,a]}) U_a
* W̃_a = (I - P_{V̄⁰_a ⊕ Ŵ_a}) S_a
* W̆_a = (I - P_{V̆⁰_a ⊕ A⁺_a ⊕ A⁻_{a+}}) V̆¹_a

Ψ has bar functions Ŵ_a ∪ W̃_a and breve functions W̆_a.  Every space
dimension is recorded and compared against its closed-form count.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .centered import CenteredBasis, KnotCheck, Report, regroup, verify_centered, verify_orth_condition
from .errors import ConsistencyError, ContractError, NotNestedError
from .linalg import RANK_TOL, embed, gram, intersection_dim, orthogonal_complement_in, orthonormalize, span_residual
from .piecewise import PiecewisePoly, Stack, restrict

NEST_TOL = 1e-8
SPAN_TOL = 1e-8

__all__ = [
    "DimensionReport",
    "KnotDims",
    "KnotSpaces",
    "WaveletScaffold",
    "build_scaffold",
    "build_wavelets",
    "regroup",
    "scaffold_report",
    "verify_centered",
    "verify_orth_condition",
]


def _span(funcs, scale: float = 1.0, tol: float = RANK_TOL) -> list[PiecewisePoly]:
    """Orthonormal basis of span(funcs), ignoring directions below ``tol * scale``."""
    funcs = [f for f in funcs if f.n_pieces]
    if not funcs:
        return []
    grid, ncoef, rows = embed(funcs)
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    k = int(np.sum(s > tol * scale))
    if k == 0:
        return []
    # rotate back to combinations of the inputs so that 1-d spaces keep their natural shape
    comb = u[:, :k].T @ rows if k < len(funcs) else rows
    return orthonormalize(Stack.from_embedded(grid, comb, ncoef).functions(), tol)


def _project_onto(funcs, onb) -> list[PiecewisePoly]:
    """Projection of each function onto the span of an orthonormal list."""
    if not onb or not funcs:
        return []
    g = gram(funcs, onb)
    grid, ncoef, rows = embed(onb)
    return Stack.from_embedded(grid, g @ rows, ncoef).functions()


def _vanishing_on(funcs, lo: float, hi: float) -> list[PiecewisePoly]:
    """Orthonormal basis of the members of span(funcs) that vanish on [lo, hi]."""
    if not funcs:
        return []
    outside = [restrict(f, lo, hi) for f in funcs]
    if all(o.n_pieces == 0 for o in outside):
        return orthonormalize(funcs)
    grid, ncoef, rows = embed(outside)
    # left null space of the restricted coordinates
    u_, s, _ = np.linalg.svd(rows, full_matrices=True)
    k = int(np.sum(s > RANK_TOL))
    null = u_[:, k:].T
    if null.shape[0] == 0:
        return []
    g2, nc2, full = embed(funcs)
    return orthonormalize(Stack.from_embedded(g2, null @ full, nc2).functions())


@dataclass(frozen=True)
class KnotSpaces:
    A_minus: tuple
    A_plus: tuple
    W_breve: tuple
    W_hat: tuple
    W_tilde: tuple
    T: tuple
    T_minus: tuple
    T_plus: tuple
    U: tuple
    S: tuple


@dataclass(frozen=True)
class KnotDims:
    k0: int
    k1: int
    kbar0: int
    kbar1: int
    kbreve0: int
    kbreve1: int
    m: int
    m_minus: int
    m_plus: int
    dim_A_minus: int
    dim_A_plus: int
    dim_W_bar: int
    dim_W_breve: int
    dim_W_hat: int
    dim_W_tilde: int
    dim_T: int
    dim_T_minus: int
    dim_T_plus: int
    dim_U: int
    dim_S: int
    has_interval: bool

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class DimensionReport:
    """Per-knot dimensions plus the closed-form checks evaluated on trusted knots."""

    knots: list
    trusted: list
    labels: list
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "knots": [
                {"knot": lab, "trusted": t, **d.to_json()} for lab, t, d in zip(self.labels, self.trusted, self.knots)
            ],
            "checks": [{"knot": c.index, "passed": c.passed, "formula": c.message} for c in self.checks],
        }


def _formula_checks(dims: list[KnotDims], trusted: list[bool]) -> list[KnotCheck]:
    out = []
    n = len(dims)

    def add(i, involved, name, lhs, rhs):
        if all(0 <= j < n and trusted[j] for j in involved):
            out.append(KnotCheck(i, lhs == rhs, float(lhs - rhs), f"{name}: {lhs} == {rhs}"))

    for i, d in enumerate(dims):
        # long wavelets
        add(i, [i], "dim W_bar = kbar1 + kbar0 - m+ - m-", d.dim_W_bar, d.kbar1 + d.kbar0 - d.m_plus - d.m_minus)
        add(i, [i], "dim W_bar = dim W_hat + dim W_tilde", d.dim_W_bar, d.dim_W_hat + d.dim_W_tilde)
        add(i, [i], "dim W_hat = kbar1 - m", d.dim_W_hat, d.kbar1 - d.m)
        add(i, [i], "dim W_tilde = kbar0 + m - m- - m+", d.dim_W_tilde, d.kbar0 + d.m - d.m_minus - d.m_plus)
        add(i, [i], "dim T = kbar0 - m", d.dim_T, d.kbar0 - d.m)
        add(i, [i], "dim T- = m+ - m", d.dim_T_minus, d.m_plus - d.m)
        add(i, [i], "dim T+ = m- - m", d.dim_T_plus, d.m_minus - d.m)
        add(i, [i], "dim U = kbar0 + m - m- - m+", d.dim_U, d.kbar0 + d.m - d.m_minus - d.m_plus)
        add(i, [i], "dim S = dim U", d.dim_S, d.dim_U)
        add(i, [i], "dim A+ = kbar0 - m+", d.dim_A_plus, d.kbar0 - d.m_plus)
        add(i, [i], "dim A- = kbar0 - m-", d.dim_A_minus, d.kbar0 - d.m_minus)
        if d.has_interval and i + 1 < n:
            e = dims[i + 1]
            add(
                i,
                [i, i + 1],
                "dim W_breve = kbreve1 - kbreve0 - kbar0 - kbar0(a+) + m+ + m-(a+)",
                d.dim_W_breve,
                d.kbreve1 - d.kbreve0 - d.kbar0 - e.kbar0 + d.m_plus + e.m_minus,
            )
            add(
                i,
                [i, i + 1],
                "kbreve1 = kbreve0 + dim A+ + dim A-(a+) + dim W_breve",
                d.kbreve1,
                d.kbreve0 + d.dim_A_plus + e.dim_A_minus + d.dim_W_breve,
            )
        if 0 < i < n - 1 and dims[i - 1].has_interval and d.has_interval:
            p, e = dims[i - 1], dims[i + 1]
            rhs = (p.m_plus - p.kbar0) + (d.k1 - d.k0 - d.kbar1 - d.kbar0 + d.m_minus + d.m_plus) + (e.m_minus - e.kbar0)
            add(i, [i - 1, i, i + 1], "dim(W_breve(a-) + W_breve) combined count", p.dim_W_breve + d.dim_W_breve, rhs)
    return out


@dataclass(frozen=True)
class WaveletScaffold:
    phi0: CenteredBasis
    phi1: CenteredBasis
    spaces: tuple
    dims: DimensionReport

    @property
    def window(self):
        return self.phi0.window


def _same_knots(w0, w1) -> bool:
    return len(w0) == len(w1) and np.allclose(w0.array, w1.array, rtol=0, atol=1e-12 * w0.scale)


def check_nested(phi0: CenteredBasis, phi1: CenteredBasis, tol: float = NEST_TOL) -> float:
    """Largest residual of a Φ⁰ group against the local Φ¹ space; raises when above ``tol``."""
    if not _same_knots(phi0.window, phi1.window):
        phi1 = regroup(phi1, phi0.window)
    worst = 0.0
    for i in range(len(phi0.window)):
        g = phi0.group(i)
        if not g:
            continue
        nb = phi1.local(i)
        res = span_residual(g, nb) if nb else 1.0
        worst = max(worst, res)
        if res > tol:
            raise NotNestedError(
                f"coarse functions at knot {phi0.window.label(i)} are not in the fine space (residual {res:.3e})"
            )
    return worst


def build_scaffold(phi0: CenteredBasis, phi1: CenteredBasis, validate: bool = True) -> WaveletScaffold:
    """All per-knot spaces of the wavelet construction plus their dimension report."""
    if not (phi0.orthonormal and phi1.orthonormal):
        raise ContractError("both bases must be flagged orthonormal")
    if not _same_knots(phi0.window, phi1.window):
        phi1 = regroup(phi1, phi0.window)
    check_nested(phi0, phi1)
    w = phi0.window
    k = w.array
    n = len(k)

    a_plus, a_minus = [], []
    for i in range(n):
        bar0 = list(phi0.bar[i])
        a_plus.append(_span(_project_onto(bar0, list(phi1.breve[i]))) if bar0 else [])
        a_minus.append(_span(_project_onto(bar0, list(phi1.breve[i - 1]))) if bar0 and i > 0 else [])

    spaces, dims = [], []
    for i in range(n):
        bar0, bar1 = list(phi0.bar[i]), list(phi1.bar[i])
        br0, br1 = list(phi0.breve[i]), list(phi1.breve[i])
        has_interval = i + 1 < n
        next_minus = a_minus[i + 1] if has_interval else []
        w_breve = orthogonal_complement_in(br1, br0 + a_plus[i] + next_minus) if br1 else []
        w_hat = orthogonal_complement_in(bar1, bar0) if bar1 else []
        t = orthogonal_complement_in(bar0, bar1) if bar0 else []
        if bar0 and 0 < i < n - 1:
            am, a, ap = k[i - 1], k[i], k[i + 1]
            t_minus = _vanishing_on(t, a, ap)
            t_plus = _vanishing_on(t, am, a)
            u = orthogonal_complement_in(t, t_minus + t_plus) if t else []
            s = _span([restrict(f, a, ap) - restrict(f, am, a) for f in u])
            w_tilde = orthogonal_complement_in(s, bar0 + w_hat) if s else []
            m = intersection_dim(bar0, bar1)
            m_plus = intersection_dim([restrict(f, a, ap) for f in bar0], [restrict(f, a, ap) for f in bar1])
            m_minus = intersection_dim([restrict(f, am, a) for f in bar0], [restrict(f, am, a) for f in bar1])
        else:
            t_minus = t_plus = u = s = w_tilde = []
            m = m_plus = m_minus = 0
        spaces.append(
            KnotSpaces(
                tuple(a_minus[i]), tuple(a_plus[i]), tuple(w_breve), tuple(w_hat), tuple(w_tilde),
                tuple(t), tuple(t_minus), tuple(t_plus), tuple(u), tuple(s),
            )
        )
        dims.append(
            KnotDims(
                k0=len(phi0.local(i)), k1=len(phi1.local(i)),
                kbar0=len(bar0), kbar1=len(bar1), kbreve0=len(br0), kbreve1=len(br1),
                m=m, m_minus=m_minus, m_plus=m_plus,
                dim_A_minus=len(a_minus[i]), dim_A_plus=len(a_plus[i]),
                dim_W_bar=len(w_hat) + len(w_tilde), dim_W_breve=len(w_breve),
                dim_W_hat=len(w_hat), dim_W_tilde=len(w_tilde),
                dim_T=len(t), dim_T_minus=len(t_minus), dim_T_plus=len(t_plus),
                dim_U=len(u), dim_S=len(s), has_interval=has_interval,
            )
        )
    trusted = [w.trusted(i) for i in range(n)]
    report = DimensionReport(dims, trusted, [w.label(i) for i in range(n)], _formula_checks(dims, trusted))
    if validate and not report.passed:
        raise ConsistencyError("dimension formulas violated: " + "; ".join(
            f"knot {report.labels[c.index]}: {c.message}" for c in report.failures))
    return WaveletScaffold(phi0, phi1, tuple(spaces), report)


def build_wavelets(scaffold: WaveletScaffold) -> CenteredBasis:
    """Ψ with bar functions Ŵ_a ∪ W̃_a and breve functions W̆_a at every knot."""
    w = scaffold.window
    bar, breve, bar_names, breve_names = [], [], [], []
    for i, sp in enumerate(scaffold.spaces):
        b = list(sp.W_hat) + list(sp.W_tilde)
        if b and not w.is_interior(i):
            raise ConsistencyError(f"long wavelets at the window edge knot {w.label(i)}")
        bar.append(b)
        bar_names.append([f"what{j}" for j in range(len(sp.W_hat))] + [f"wtilde{j}" for j in range(len(sp.W_tilde))])
        breve.append(list(sp.W_breve))
        breve_names.append([f"wbreve{j}" for j in range(len(sp.W_breve))])
    return CenteredBasis(w, bar, breve, True, bar_names, breve_names)


def scaffold_report(scaffold: WaveletScaffold, psi: CenteredBasis | None = None, tol: float = 1e-9) -> Report:
    """Structural checks of a scaffold on its trusted knots.

    Covers mutual orthogonality of V̆⁰_a, A⁺_a, A⁻_{a+}; span(A⁻ ∪ A⁺) = span(S ∪ T);
    V̄⁰ ⊕ Ŵ = T ⊕ V̄¹; the alternative formula for the long wavelet space; and,
    when Ψ is given, orthonormality, Ψ ⊥ Φ⁰ and local reconstruction of Φ¹.
    """
    rep = Report("scaffold")
    phi0, phi1 = scaffold.phi0, scaffold.phi1
    w = scaffold.window
    n = len(w)
    sp = scaffold.spaces

    def val(i, name, x, limit):
        rep.checks.append(KnotCheck(i, x < limit, float(x), name))

    def span_eq(F, G):
        if not F and not G:
            return 0.0
        if not F or not G:
            return 1.0
        return max(span_residual(F, G), span_residual(G, F))

    for i in range(n):
        if not w.trusted(i):
            continue
        s = sp[i]
        if i + 1 < n and w.trusted(i + 1):
            parts = [list(phi0.breve[i]), list(s.A_plus), list(sp[i + 1].A_minus)]
            worst = 0.0
            for x in range(3):
                for y in range(x + 1, 3):
                    if parts[x] and parts[y]:
                        worst = max(worst, float(np.max(np.abs(gram(parts[x], parts[y])))))
            val(i, "breve V0, A+ and A-(a+) mutually orthogonal", worst, tol)
        if phi0.bar[i]:
            val(i, "span(A- + A+) = span(S + T)", span_eq(list(s.A_minus) + list(s.A_plus), list(s.S) + list(s.T)), SPAN_TOL)
            val(i, "V0bar + W_hat = T + V1bar", span_eq(list(phi0.bar[i]) + list(s.W_hat), list(s.T) + list(phi1.bar[i])), SPAN_TOL)
            alt = orthogonal_complement_in(list(s.A_minus) + list(phi1.bar[i]) + list(s.A_plus), list(phi0.bar[i]))
            val(i, "W_hat + W_tilde equals the direct long-wavelet formula", span_eq(list(s.W_hat) + list(s.W_tilde), alt), SPAN_TOL)
    if psi is not None:
        fs = psi.functions()
        if fs:
            g = gram(fs)
            val(-1, "Psi orthonormal", float(np.max(np.abs(g - np.eye(len(fs))))), tol)
            val(-1, "Psi orthogonal to Phi0", float(np.max(np.abs(gram(fs, phi0.functions())))), tol)
        worst = 0.0
        for i in range(n):
            if w.trusted(i) and phi1.group(i):
                local = [f for j in range(max(i - 1, 0), min(i + 2, n)) for f in phi0.local(j) + psi.local(j)]
                worst = max(worst, span_residual(phi1.group(i), local) if local else 1.0)
        val(-1, "Phi1 reconstructed from Phi0 and Psi", worst, SPAN_TOL)
    return rep
