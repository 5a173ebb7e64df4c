"""Continuous piecewise-quadratic orthogonal bases with one interior breakpoint per interval.

For θ in (0, 1) the space spanned by the two half bumps q_0^θ, q_1^θ and the
hat h^θ (all with breakpoint θ) contains q = 4x(1 - x).  Its part orthogonal
to q is spanned by u_0, u_1, and a function z^θ = u_0 + c u_1 is chosen so
that projecting q and z^θ out of r and l leaves them orthogonal.  The
admissible c are the roots of

    4(1 + 45(1-θ)θ) c^2 - 20(2 + θ(9 + 13θ(2θ - 3))) c
        + 5(4 - 5(1-θ)^2 θ^2 (15 + (1-θ)θ)) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .centered import CenteredBasis
from .errors import ConsistencyError, ContractError, DomainError
from .knots import ENDPOINT, KnotWindow
from .linalg import gram, residual_many
from .piecewise import PiecewisePoly, compose_affine, l, norm, quad_bump, r, scale

THETA_MIN = 1e-6
CHECK_TOL = 1e-10


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not (THETA_MIN <= theta <= 1.0 - THETA_MIN):
        raise DomainError(f"theta = {theta} must lie in [{THETA_MIN}, {1 - THETA_MIN}]")
    return theta


def imra_coefficients(theta: float) -> tuple[float, float, float]:
    """(constant, linear, quadratic) coefficients of the equation for c."""
    t = theta
    s = 1.0 - t
    c0 = 5.0 * (4.0 - 5.0 * s * s * t * t * (15.0 + s * t))
    c1 = -20.0 * (2.0 + t * (9.0 + 13.0 * t * (2.0 * t - 3.0)))
    c2 = 4.0 * (1.0 + 45.0 * s * t)
    return c0, c1, c2


def imra_residual(theta: float, c: float) -> float:
    c0, c1, c2 = imra_coefficients(theta)
    return c0 + c1 * c + c2 * c * c


def discriminant(theta: float) -> float:
    c0, c1, c2 = imra_coefficients(theta)
    return c1 * c1 - 4.0 * c2 * c0


def discriminant_closed_form(theta: float) -> float:
    return 80.0 * (4.0 - 15.0 * (1.0 - theta) ** 2 * theta**2) ** 2


def c_roots(theta: float) -> tuple[float, float]:
    """The two roots ('+' branch first) in the closed form."""
    t = theta
    num = 20.0 * (2.0 + t * (9.0 + 13.0 * t * (2.0 * t - 3.0)))
    rad = 4.0 * math.sqrt(5.0) * (4.0 - 15.0 * (1.0 - t) ** 2 * t * t)
    den = 8.0 * (1.0 + 45.0 * (1.0 - t) * t)
    return (num + rad) / den, (num - rad) / den


def half_functions(theta: float) -> tuple[PiecewisePoly, PiecewisePoly, PiecewisePoly]:
    """q_0^θ, q_1^θ and h^θ on [0, 1] with breakpoint θ."""
    bp = [0.0, theta, 1.0]
    q0 = PiecewisePoly.from_local_monomials(bp, [[0.0, 4.0, -4.0], [0.0]])
    q1 = PiecewisePoly.from_local_monomials(bp, [[0.0], [0.0, 4.0, -4.0]])
    h = PiecewisePoly.from_local_monomials(bp, [[0.0, 1.0], [1.0, -1.0]])
    return q0, q1, h


def u_functions(theta: float) -> tuple[PiecewisePoly, PiecewisePoly]:
    """Basis u_0, u_1 of the orthogonal complement of q in span{q_0, q_1, h}."""
    t = theta
    q0, q1, h = half_functions(t)
    u0 = (1 - t) ** 2 * (2 + 3 * t) * q0 + t * t * (3 * t - 5) * q1
    u1 = (-2 + 3 * (t - 1) * t**3) * q0 + (-2 + 3 * (t - 1) ** 3 * t) * q1 + (16.0 / 5.0 - 12 * (t - 1) ** 2 * t * t) * h
    return u0, u1


@dataclass(frozen=True)
class QuadLocal:
    theta: float
    q: PiecewisePoly
    z_theta: PiecewisePoly
    r_theta: PiecewisePoly
    l_theta: PiecewisePoly
    c: float
    c_root_choice: str


def quad_local(theta: float, branch: str = "+", check: bool = True) -> QuadLocal:
    """The orthogonal system {r^θ, l^θ, q, z^θ} on [0, 1]."""
    theta = check_theta(theta)
    if branch not in ("+", "-"):
        raise ContractError("branch must be '+' or '-'")
    plus, minus = c_roots(theta)
    c = plus if branch == "+" else minus
    u0, u1 = u_functions(theta)
    z = u0 + c * u1
    z = scale(z, 1.0 / norm(z))
    q = quad_bump()
    rt, lt = residual_many([r(), l()], [q, z])
    loc = QuadLocal(theta, q, z, rt, lt, c, branch)
    if check:
        g = gram([rt, lt, q, z])
        off = np.abs(g - np.diag(np.diag(g))).max()
        if off > CHECK_TOL:
            raise ConsistencyError(f"quadratic system not orthogonal at theta={theta}: {off:.3e}")
    return loc


def theta_sequence(window: KnotWindow, thetas) -> tuple:
    """Expand a constant or per-interval θ specification to one value per interval."""
    m = len(window) - 1
    if np.isscalar(thetas):
        vals = (float(thetas),) * m
    else:
        vals = tuple(float(t) for t in thetas)
        if len(vals) != m:
            raise ContractError(f"need {m} theta values, got {len(vals)}")
    for t in vals:
        check_theta(t)
    return vals


def b_points(window: KnotWindow, thetas) -> np.ndarray:
    """b_a = (1 - θ_a) a + θ_a a_+ for every knot with a successor."""
    th = np.asarray(theta_sequence(window, thetas))
    k = window.array
    return (1.0 - th) * k[:-1] + th * k[1:]


def omega(window: KnotWindow, thetas, normalized: bool = True, branch: str = "+") -> CenteredBasis:
    """The centered orthogonal basis Ω_{a,θ}: bar first, then q and z per interval."""
    th = theta_sequence(window, thetas)
    cache: dict = {}

    def local(t):
        if t not in cache:
            cache[t] = quad_local(t, branch)
        return cache[t]

    k = window.array
    n = len(k)
    bar = [[] for _ in range(n)]
    breve = [[] for _ in range(n)]
    bar_names = [[] for _ in range(n)]
    breve_names = [[] for _ in range(n)]
    for i in range(n - 1):
        a, b = k[i], k[i + 1]
        loc = local(th[i])
        funcs, names = [], []
        if window.at_left_end(i):
            funcs.append(loc.l_theta)
            names.append("l")
        if i + 1 == n - 1 and window.right_role == ENDPOINT:
            funcs.append(loc.r_theta)
            names.append("r")
        funcs += [loc.q, loc.z_theta]
        names += ["q", "z"]
        breve[i] = [compose_affine(f, a, b) for f in funcs]
        breve_names[i] = names
    for i in range(1, n - 1):
        left = local(th[i - 1])
        right = local(th[i])
        bar[i] = [compose_affine(left.r_theta, k[i - 1], k[i]) + compose_affine(right.l_theta, k[i], k[i + 1])]
        bar_names[i] = ["bar"]
    B = CenteredBasis(window, bar, breve, False, bar_names, breve_names)
    if normalized:
        B = B.normalized().with_flag(True)
    return B


@dataclass
class NestingReport:
    holds: bool
    failures: list

    def __bool__(self):
        return self.holds


def nesting_report(w0: KnotWindow, t0, w1: KnotWindow, t1) -> NestingReport:
    """Check the sufficient condition for S(Ω_{a0,θ0}) ⊂ S(Ω_{a1,θ1}) interval by interval."""
    k0, k1 = w0.array, w1.array
    tol = 1e-12 * max(w0.scale, w1.scale)
    for x in k0:
        if np.min(np.abs(k1 - x)) > tol:
            raise ContractError(f"knot {x} of the coarse window is missing from the fine window")
    b0 = b_points(w0, t0)
    b1 = b_points(w1, t1)
    failures = []
    for i in range(len(k0) - 1):
        a, ap = k0[i], k0[i + 1]
        inner = k1[(k1 > a + tol) & (k1 < ap - tol)]
        if inner.size:
            if np.min(np.abs(inner - b0[i])) > tol:
                failures.append(f"interval [{a}, {ap}] is subdivided but b = {b0[i]} is not a fine knot")
        elif np.min(np.abs(b1 - b0[i])) > tol:
            failures.append(f"interval [{a}, {ap}] is not subdivided and b = {b0[i]} is not a fine b-point")
    return NestingReport(not failures, failures)


def nesting_hypothesis(w0: KnotWindow, t0, w1: KnotWindow, t1) -> bool:
    return nesting_report(w0, t0, w1, t1).holds


def insert_b_points(window: KnotWindow, thetas) -> KnotWindow:
    """Refine a window by adding its b-points; any θ on the result then satisfies the nesting condition."""
    pts = np.sort(np.concatenate([window.array, b_points(window, thetas)]))
    return KnotWindow(tuple(pts), window.left_role, window.right_role)


def midpoint_refinement(window: KnotWindow) -> KnotWindow:
    k = window.array
    pts = np.sort(np.concatenate([k, 0.5 * (k[:-1] + k[1:])]))
    return KnotWindow(tuple(pts), window.left_role, window.right_role)
