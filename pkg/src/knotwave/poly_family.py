"""Continuous orthogonal spline bases reproducing polynomials of degree n.

On [0, 1], with s = 2x - 1 and p_i the monic ultraspherical polynomials of
parameter 5/2, the functions

    φ̃^i(x) = x(1 - x) p_{i-2}(2x - 1),   i >= 2,

are orthogonal.  Adding z^n = α_n φ̃^{n+1} + φ̃^{n+3} makes the projections
r^n, l^n of r = x and l = 1 - x orthogonal, which yields a centered
orthogonal basis Ω^n of a space between S^0_n and S^0_{n+3}.  Closed-form
wavelets for the pair (Ω^n, Ω^{n+3}) are in ``poly_wavelets``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .centered import CenteredBasis
from .errors import ConsistencyError, ContractError
from .knots import KnotWindow
from .linalg import orthonormalize, residual, residual_many
from .piecewise import (
    PiecewisePoly,
    Polynomial,
    compose_affine,
    inner_product,
    l,
    linear_combination,
    norm,
    r,
    scale,
)

CHECK_TOL = 1e-10


def ultraspherical_gamma(n: int) -> float:
    """Recurrence coefficient: p_{n+1} = x p_n - γ_n p_{n-1} for the monic λ = 5/2 family."""
    return n * (n + 4) / ((2 * n + 5) * (2 * n + 3))


def ultraspherical_monic(i: int) -> Polynomial:
    """Monic ultraspherical polynomial of degree i with λ = 5/2 (weight (1 - x^2)^2 on [-1, 1])."""
    if i < 0:
        raise ContractError("degree must be nonnegative")
    prev, cur = Polynomial([]), Polynomial([1.0])
    x = Polynomial([0.0, 1.0])
    for n in range(i):
        prev, cur = cur, x * cur - prev * ultraspherical_gamma(n)
    return cur


def phi_tilde(i: int) -> PiecewisePoly:
    """φ̃^i = x(1 - x) p_{i-2}(2x - 1) on [0, 1]."""
    if i < 2:
        raise ContractError("φ̃^i is defined for i >= 2")
    # in the local coordinate s = 2x - 1 of [0, 1]: x(1 - x) = (1 - s^2) / 4
    p = Polynomial([0.25, 0.0, -0.25]) * ultraspherical_monic(i - 2)
    return PiecewisePoly([0.0, 1.0], npleg.poly2leg(p.coeffs)[None, :])


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def phi_tilde_norm_sq(n: int) -> float:
    """Closed form of ||φ̃^n||^2."""
    return math.factorial(n - 2) * math.factorial(n + 2) / (16 * _double_factorial(2 * n - 1) * _double_factorial(2 * n + 1))


def r_phi_tilde(n: int) -> float:
    """Closed form of <r, φ̃^n>; <l, φ̃^n> = (-1)^n times this."""
    return math.factorial(n - 2) / (4 * _double_factorial(2 * n - 1))


def rl_closed_form(n: int) -> float:
    """Closed form of <r_n, l_n> where r_n, l_n are r, l with U_n projected out."""
    return (-1) ** (n + 1) / (n * (n + 1) * (n + 2))


def alpha(n: int) -> float:
    """α_n from the positive branch of its defining quadratic."""
    return -(n + 1) / (2 * n + 5) + (n + 3) / (2 * n + 5) * math.sqrt(3 * (n + 1) * (n + 3) / ((2 * n + 7) * (2 * n + 3)))


def alpha_quadratic(n: int, a: float) -> float:
    """Value of the quadratic whose positive root is α_n, at a."""
    c1 = 2 * (n + 1) / (2 * n + 5)
    c0 = (n + 2) * (n + 1) * (n * n - 5 * n - 30) / ((2 * n + 7) * (2 * n + 5) ** 2 * (2 * n + 3))
    return a * a + c1 * a + c0


def z_function(n: int) -> PiecewisePoly:
    """z^n = α_n φ̃^{n+1} + φ̃^{n+3}."""
    return alpha(n) * phi_tilde(n + 1) + phi_tilde(n + 3)


@dataclass(frozen=True)
class PolyFamily:
    """Building blocks of Ω^n on [0, 1].

    ``r_n``/``l_n`` have U_n = span{φ̃^2..φ̃^n} projected out;
    ``r_n_proj``/``l_n_proj`` additionally have z^n removed.
    """

    n: int
    phi_tilde: tuple
    alpha_n: float
    z_n: PiecewisePoly
    r_n: PiecewisePoly
    l_n: PiecewisePoly
    r_n_proj: PiecewisePoly
    l_n_proj: PiecewisePoly

    @property
    def lam(self) -> list[PiecewisePoly]:
        """Basis of Λ^n = span{φ̃^2, ..., φ̃^n, z^n}, ordered z first."""
        return [self.z_n] + list(self.phi_tilde)


def build_family(n: int, check: bool = True) -> PolyFamily:
    if n < 1:
        raise ContractError("n must be at least 1")
    phis = tuple(phi_tilde(i) for i in range(2, n + 1))
    z = z_function(n)
    rn = residual(r(), list(phis)) if phis else r()
    ln = residual(l(), list(phis)) if phis else l()
    rp, lp = residual_many([r(), l()], list(phis) + [z])
    fam = PolyFamily(n, phis, alpha(n), z, rn, ln, rp, lp)
    if check:
        problems = []
        got = inner_product(rn, ln)
        want = rl_closed_form(n)
        if abs(got - want) > CHECK_TOL * abs(want):
            problems.append(f"<r_n, l_n> = {got!r}, expected {want!r}")
        orth = inner_product(rp, lp)
        if abs(orth) > CHECK_TOL:
            problems.append(f"<r_n, (I - P_z) l_n> = {orth!r}")
        if problems:
            raise ConsistencyError("; ".join(problems))
    return fam


def omega_basis(fam: PolyFamily, w: KnotWindow, normalized: bool = True) -> CenteredBasis:
    """The centered orthogonal basis Ω^n on a knot window."""
    k = w.array
    n = len(k)
    bar = [[] for _ in range(n)]
    breve = [[] for _ in range(n)]
    bar_names = [[] for _ in range(n)]
    breve_names = [[] for _ in range(n)]
    for i in range(n - 1):
        a, b = k[i], k[i + 1]
        funcs, names = [], []
        if w.at_left_end(i):
            funcs.append(fam.l_n_proj)
            names.append("l")
        if i + 1 == n - 1 and w.right_role == "endpoint":
            funcs.append(fam.r_n_proj)
            names.append("r")
        funcs.append(fam.z_n)
        names.append("z")
        for j, f in enumerate(fam.phi_tilde):
            funcs.append(f)
            names.append(f"phi{j + 2}")
        breve[i] = [compose_affine(f, a, b) for f in funcs]
        breve_names[i] = names
    for i in range(1, n - 1):
        bar[i] = [compose_affine(fam.r_n_proj, k[i - 1], k[i]) + compose_affine(fam.l_n_proj, k[i], k[i + 1])]
        bar_names[i] = ["bar"]
    B = CenteredBasis(w, bar, breve, False, bar_names, breve_names)
    if normalized:
        B = B.normalized().with_flag(True)
    return B


def delta_space(fam: PolyFamily, fam3: PolyFamily) -> list[PiecewisePoly]:
    """Basis {φ̃^{n+2}, z^n_⊥, z^{n+3}} of Λ^{n+3} ⊖ Λ^n."""
    n = fam.n
    if fam3.n != n + 3:
        raise ContractError("second family must have degree n + 3")
    p1, p3 = phi_tilde(n + 1), phi_tilde(n + 3)
    zperp = p1 / inner_product(p1, p1) - fam.alpha_n * p3 / inner_product(p3, p3)
    return [phi_tilde(n + 2), zperp, fam3.z_n]


def poly_wavelets(n: int, w: KnotWindow, normalized: bool = True) -> CenteredBasis:
    """Closed-form wavelets for the pair Ω^n ⊂ Ω^{n+3}.

    Interior knots get ŵ and w̃, every interval gets w̆.  On an interval that
    touches a true domain endpoint the short wavelet space is two-dimensional;
    the second function there is the normalized residual of the endpoint
    half-hat of Ω^{n+3} against the rest.
    """
    f0 = build_family(n)
    f3 = build_family(n + 3)
    k = w.array
    nk = len(k)
    r0, l0, r3, l3 = f0.r_n_proj, f0.l_n_proj, f3.r_n_proj, f3.l_n_proj
    kappa = inner_product(r3, r3) / inner_product(r0, r0)
    rdiff, ldiff = r0 - r3, l0 - l3
    ref = r()
    phi = phi_tilde(n + 2)
    short = inner_product(f3.z_n, ref) * phi - inner_product(phi, ref) * f3.z_n
    bar = [[] for _ in range(nk)]
    breve = [[] for _ in range(nk)]
    bar_names = [[] for _ in range(nk)]
    breve_names = [[] for _ in range(nk)]
    for i in range(1, nk - 1):
        am, a, ap = k[i - 1], k[i], k[i + 1]
        what = compose_affine(r3 - kappa * r0, am, a) + compose_affine(l3 - kappa * l0, a, ap)
        ca = (a - am) / (ap - a)
        wtil = compose_affine(rdiff, am, a) - ca * compose_affine(ldiff, a, ap)
        bar[i] = [what, wtil]
        bar_names[i] = ["what", "wtilde"]
    for i in range(nk - 1):
        a, ap = k[i], k[i + 1]
        g = [compose_affine(short, a, ap)]
        names = ["wbreve"]
        left_end = w.at_left_end(i)
        right_end = i + 1 == nk - 1 and w.right_role == "endpoint"
        if left_end or right_end:
            # V̆^0 on this interval plus the A^± pieces from the non-endpoint side
            others = [compose_affine(f, a, ap) for f in f0.lam]
            if left_end:
                others.append(compose_affine(l0, a, ap))
            if right_end:
                others.append(compose_affine(r0, a, ap))
            if not right_end:
                others.append(compose_affine(rdiff, a, ap))
            if not left_end:
                others.append(compose_affine(ldiff, a, ap))
            others.append(g[0])
            seeds = []
            if left_end:
                seeds.append(compose_affine(l3, a, ap))
            if right_end:
                seeds.append(compose_affine(r3, a, ap))
            extra = orthonormalize(residual_many(seeds, orthonormalize(others)))
            for j, e in enumerate(extra):
                g.append(e)
                names.append(f"wbreve_end{j}")
        breve[i] = g
        breve_names[i] = names
    B = CenteredBasis(w, bar, breve, False, bar_names, breve_names)
    if normalized:
        B = B.normalized()
        # bar pairs are not orthogonal to each other; orthonormalize within each knot
        bar_on = [orthonormalize(list(g)) if g else [] for g in B.bar]
        breve_on = [orthonormalize(list(g)) if g else [] for g in B.breve]
        B = CenteredBasis(w, bar_on, breve_on, True, B.bar_names, B.breve_names)
    return B
