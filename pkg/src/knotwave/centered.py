"""Bases centered on a knot window.

A centered basis assigns to every knot a_i two lists of functions: ``breve[i]``
supported in [a_i, a_{i+1}] and ``bar[i]`` straddling a_i, supported in
[a_{i-1}, a_{i+1}].  The local spaces used throughout are

* V̆_i = span breve[i]
* V̄_i = span bar[i]
* V_i = span(breve[i-1] ∪ bar[i] ∪ breve[i])
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError
from .knots import KnotWindow
from .linalg import gram, rank, residual_many, span_residual
from .piecewise import PiecewisePoly, compose_affine, l, norm, r, restrict, scale

SUPPORT_RTOL = 1e-12


@dataclass(frozen=True)
class CenteredBasis:
    window: KnotWindow
    bar: tuple
    breve: tuple
    orthonormal: bool = False
    bar_names: tuple | None = None
    breve_names: tuple | None = None

    def __post_init__(self):
        n = len(self.window)
        bar = tuple(tuple(g) for g in self.bar)
        breve = tuple(tuple(g) for g in self.breve)
        if len(bar) != n or len(breve) != n:
            raise ContractError("need one bar and one breve list per knot")
        object.__setattr__(self, "bar", bar)
        object.__setattr__(self, "breve", breve)
        for attr, groups in (("bar_names", bar), ("breve_names", breve)):
            names = getattr(self, attr)
            if names is None:
                prefix = attr.split("_")[0]
                names = tuple(tuple(f"{prefix}{j}" for j in range(len(g))) for g in groups)
            object.__setattr__(self, attr, tuple(tuple(x) for x in names))

    @property
    def knots(self) -> np.ndarray:
        return self.window.array

    def __len__(self) -> int:
        return sum(len(b) + len(v) for b, v in zip(self.bar, self.breve))

    def group(self, i: int) -> list[PiecewisePoly]:
        """Φ_a at knot i, ordered bar first then breve."""
        return list(self.bar[i]) + list(self.breve[i])

    def local(self, i: int) -> list[PiecewisePoly]:
        """Basis of V_i: breve[i-1], bar[i], breve[i]."""
        prev = list(self.breve[i - 1]) if i > 0 else []
        return prev + list(self.bar[i]) + list(self.breve[i])

    def functions(self) -> list[PiecewisePoly]:
        out = []
        for i in range(len(self.window)):
            out.extend(self.group(i))
        return out

    def labelled(self):
        """(knot index, flavour, position, name, function) for every function in canonical order."""
        out = []
        for i in range(len(self.window)):
            for j, f in enumerate(self.bar[i]):
                out.append((i, "bar", j, self.bar_names[i][j], f))
            for j, f in enumerate(self.breve[i]):
                out.append((i, "breve", j, self.breve_names[i][j], f))
        return out

    def counts(self, i: int) -> tuple[int, int]:
        return len(self.bar[i]), len(self.breve[i])

    def normalized(self) -> "CenteredBasis":
        """Every function divided by its norm."""

        def nz(g):
            return tuple(scale(f, 1.0 / norm(f)) for f in g)

        return CenteredBasis(
            self.window,
            tuple(nz(g) for g in self.bar),
            tuple(nz(g) for g in self.breve),
            orthonormal=self.orthonormal,
            bar_names=self.bar_names,
            breve_names=self.breve_names,
        )

    def with_flag(self, orthonormal: bool) -> "CenteredBasis":
        return CenteredBasis(self.window, self.bar, self.breve, orthonormal, self.bar_names, self.breve_names)


def _tol(window: KnotWindow) -> float:
    return SUPPORT_RTOL * window.scale


def regroup(fine: CenteredBasis, coarse: KnotWindow) -> CenteredBasis:
    """Re-index a basis on a refined window by the knots of a coarser window.

    A function supported inside one coarse interval [a, a+] joins breve at a;
    one that straddles a coarse knot a joins bar at a.  Order within a group
    follows the fine knots left to right, bar before breve.
    """
    ck = coarse.array
    tol = _tol(coarse)
    n = len(ck)
    bar = [[] for _ in range(n)]
    breve = [[] for _ in range(n)]
    bar_names = [[] for _ in range(n)]
    breve_names = [[] for _ in range(n)]
    for i, flavour, _, name, f in fine.labelled():
        if f.n_pieces == 0:
            continue
        s0, s1 = f.support
        inside = np.flatnonzero((ck[:-1] <= s0 + tol) & (ck[1:] >= s1 - tol))
        label = f"{fine.window.label(i)}:{name}"
        if inside.size:
            k = int(inside[0])
            breve[k].append(f)
            breve_names[k].append(label)
            continue
        straddled = np.flatnonzero((ck > s0 + tol) & (ck < s1 - tol))
        if straddled.size != 1:
            raise ContractError(f"function at fine knot {i} straddles {straddled.size} coarse knots")
        k = int(straddled[0])
        bar[k].append(f)
        bar_names[k].append(label)
    return CenteredBasis(coarse, bar, breve, fine.orthonormal, bar_names, breve_names)


# ---------------------------------------------------------------------------
# checks


@dataclass
class KnotCheck:
    index: int
    passed: bool
    value: float = 0.0
    message: str = ""


@dataclass
class Report:
    name: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def worst(self) -> float:
        return max([c.value for c in self.checks] + [0.0])


def verify_centered(B: CenteredBasis, tol: float = 1e-9) -> Report:
    """Support containment, local linear independence, and orthonormality when flagged."""
    w = B.window
    k = w.array
    eps = _tol(w)
    rep = Report("centered")
    n = len(k)
    for i in range(n):
        msgs = []
        for f in B.breve[i]:
            if i + 1 >= n:
                msgs.append("breve function at the last knot")
                break
            s0, s1 = f.support
            if s0 < k[i] - eps or s1 > k[i + 1] + eps:
                msgs.append(f"breve support [{s0}, {s1}] leaves [{k[i]}, {k[i + 1]}]")
        for f in B.bar[i]:
            if not w.is_interior(i):
                msgs.append("bar function at a window edge")
                break
            s0, s1 = f.support
            if s0 < k[i - 1] - eps or s1 > k[i + 1] + eps:
                msgs.append(f"bar support [{s0}, {s1}] leaves [{k[i - 1]}, {k[i + 1]}]")
            elif s0 >= k[i] - eps or s1 <= k[i] + eps:
                msgs.append("bar function does not straddle its knot")
        if i + 1 < n:
            # condition (c): bar_i, breve_i, bar_{i+1} restricted to [a_i, a_{i+1}] independent
            local = [restrict(f, k[i], k[i + 1]) for f in list(B.bar[i]) + list(B.breve[i]) + list(B.bar[i + 1])]
            if local and rank(local, tol) != len(local):
                msgs.append(f"restriction to [{k[i]}, {k[i + 1]}] is linearly dependent")
        rep.checks.append(KnotCheck(i, not msgs, 0.0, "; ".join(msgs)))
    if B.orthonormal:
        g = gram(B.functions())
        err = float(np.max(np.abs(g - np.eye(len(g))))) if len(g) else 0.0
        rep.checks.append(KnotCheck(-1, err < tol, err, "orthonormality"))
    return rep


def verify_orth_condition(B: CenteredBasis, tol: float = 1e-9) -> Report:
    """Check that (I - P_{V̆_a}) V_a is orthogonal to V_{a+} at every knot."""
    rep = Report("orthogonality condition")
    n = len(B.window)
    for i in range(n - 1):
        va = [f for f in B.local(i)]
        vnext = [f for f in B.local(i + 1)]
        if not va or not vnext:
            rep.checks.append(KnotCheck(i, True, 0.0))
            continue
        res = residual_many(va, list(B.breve[i])) if B.breve[i] else va
        res = [scale(f, 1.0 / norm(g)) for f, g in zip(res, va)]
        vn = [scale(f, 1.0 / norm(f)) for f in vnext]
        val = float(np.max(np.abs(gram(res, vn))))
        rep.checks.append(KnotCheck(i, val < tol, val, "" if val < tol else f"max entry {val:.3e}"))
    return rep


def containment_residual(coarse: Sequence[PiecewisePoly], fine: Sequence[PiecewisePoly]) -> float:
    """Largest relative residual of a coarse function after projection onto span(fine)."""
    return span_residual(list(coarse), list(fine))


# ---------------------------------------------------------------------------
# classical continuous splines


def _bubble(j: int) -> PiecewisePoly:
    """u(1 - u) u^j on [0, 1]."""
    coef = [0.0] * (j + 1) + [1.0, -1.0]
    return PiecewisePoly.from_local_monomials([0.0, 1.0], [coef])


def spline_basis(window: KnotWindow, degree: int) -> CenteredBasis:
    """Hat-and-bubble basis of continuous piecewise polynomials of the given degree.

    bar at an interior knot is the hat function; breve on each interval holds
    degree - 1 bubbles, plus the half hat at a true domain endpoint.
    """
    if degree < 1:
        raise ContractError("degree must be at least 1")
    k = window.array
    n = len(k)
    bar = [[] for _ in range(n)]
    breve = [[] for _ in range(n)]
    for i in range(n):
        if i + 1 < n:
            a, b = k[i], k[i + 1]
            g = []
            if window.at_left_end(i):
                g.append(compose_affine(l(), a, b))
            if i + 1 == n - 1 and window.right_role == "endpoint":
                g.append(compose_affine(r(), a, b))
            g.extend(compose_affine(_bubble(j), a, b) for j in range(degree - 1))
            breve[i] = g
        if window.is_interior(i):
            bar[i] = [compose_affine(r(), k[i - 1], k[i]) + compose_affine(l(), k[i], k[i + 1])]
    return CenteredBasis(window, bar, breve)
