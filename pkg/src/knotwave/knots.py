"""Knot windows and exact arithmetic on the golden-mean lattice.

``TauNumber(p, q)`` is the element p + q*tau of Z[tau], tau = (1 + sqrt 5) / 2,
with tau**2 = 1 + tau.  Order comparisons are exact: p + q*tau has the sign of
A + B*sqrt(5) with A = 2p + q and B = q.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Sequence

import numpy as np

from .errors import ContractError, DomainError, KnotNotFoundError, WindowCutError

TAU = (1.0 + math.sqrt(5.0)) / 2.0


@total_ordering
@dataclass(frozen=True)
class TauNumber:
    """Exact p + q*tau with integer p, q."""

    p: int
    q: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))

    @staticmethod
    def of(x) -> "TauNumber":
        if isinstance(x, TauNumber):
            return x
        if isinstance(x, (int, np.integer)):
            return TauNumber(int(x), 0)
        raise TypeError(f"cannot convert {x!r} to TauNumber")

    def __add__(self, other):
        o = TauNumber.of(other)
        return TauNumber(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __neg__(self):
        return TauNumber(-self.p, -self.q)

    def __sub__(self, other):
        return self + (-TauNumber.of(other))

    def __rsub__(self, other):
        return TauNumber.of(other) - self

    def __mul__(self, other):
        o = TauNumber.of(other)
        return TauNumber(self.p * o.p + self.q * o.q, self.p * o.q + self.q * o.p + self.q * o.q)

    __rmul__ = __mul__

    def sign(self) -> int:
        a, b = 2 * self.p + self.q, self.q
        if a >= 0 and b >= 0:
            return 0 if a == 0 and b == 0 else 1
        if a <= 0 and b <= 0:
            return -1
        # opposite signs: compare a^2 with 5 b^2
        if a > 0:
            return 1 if a * a > 5 * b * b else -1
        return 1 if 5 * b * b > a * a else -1

    def __lt__(self, other):
        return (self - TauNumber.of(other)).sign() < 0

    def __float__(self):
        a, b = 2 * self.p + self.q, self.q
        if (a >= 0) == (b >= 0) or a == 0 or b == 0:
            return (a + b * math.sqrt(5.0)) / 2.0
        # a + b sqrt5 = (a^2 - 5 b^2) / (a - b sqrt5) avoids cancellation
        return (a * a - 5 * b * b) / (a - b * math.sqrt(5.0)) / 2.0

    def to_real(self) -> float:
        return float(self)

    def times_tau_power(self, k: int) -> "TauNumber":
        """Exact product with tau**k for any integer k."""
        x = self
        if k >= 0:
            for _ in range(k):
                x = TauNumber(x.q, x.p + x.q)
        else:
            for _ in range(-k):
                # tau^{-1} = tau - 1, so (p + q tau)/tau = (q - p) + p tau
                x = TauNumber(x.q - x.p, x.p)
        return x

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        if self.p == 0:
            return "tau" if self.q == 1 else f"{self.q}*tau"
        sign = "+" if self.q > 0 else "-"
        mag = abs(self.q)
        return f"{self.p}{sign}{'' if mag == 1 else str(mag) + '*'}tau"

    def to_json(self):
        return {"p": self.p, "q": self.q}


ZERO = TauNumber(0, 0)
ONE = TauNumber(1, 0)
TAU_N = TauNumber(0, 1)
LONG = ONE
SHORT = TauNumber(-1, 1)  # 1/tau = tau - 1


def tau_power(k: int) -> TauNumber:
    return ONE.times_tau_power(k)


def fibonacci_word(n: int) -> str:
    """First n letters of the gap word of the nonnegative tau-integers."""
    if n < 1:
        raise ValueError("n must be positive")
    w = "L"
    while len(w) < n:
        w = "".join("LS" if ch == "L" else "L" for ch in w)
    return w[:n]


def tau_integers(count: int) -> list[TauNumber]:
    """First ``count`` nonnegative tau-integers in increasing order."""
    if count < 1:
        raise ValueError("count must be positive")
    out = [ZERO]
    for ch in fibonacci_word(count - 1) if count > 1 else "":
        out.append(out[-1] + (LONG if ch == "L" else SHORT))
    return out


def tau_integers_upto(bound: TauNumber) -> list[TauNumber]:
    """All nonnegative tau-integers <= bound."""
    out = [ZERO]
    n = 64
    while True:
        word = fibonacci_word(n)
        out = [ZERO]
        for ch in word:
            nxt = out[-1] + (LONG if ch == "L" else SHORT)
            if nxt > bound:
                return out
            out.append(nxt)
        n *= 2


def tau_digits(a: TauNumber) -> list[int]:
    """Exponents k >= 0 of the greedy expansion a = sum tau^k, or raise if a is not a tau-integer."""
    a = TauNumber.of(a)
    if a < ZERO:
        raise DomainError(f"{a} is negative")
    exps = []
    rest = a
    while rest != ZERO:
        if rest < ONE:
            raise DomainError(f"{a} is not a nonnegative tau-integer")
        k = 0
        while tau_power(k + 1) <= rest:
            k += 1
        if exps and k >= exps[-1] - 1:
            raise DomainError(f"{a} is not a nonnegative tau-integer")
        exps.append(k)
        rest = rest - tau_power(k)
    return exps


def is_tau_integer(a: TauNumber) -> bool:
    try:
        tau_digits(a)
    except DomainError:
        return False
    return True


class GapClass(str, enum.Enum):
    LS = "LS"
    SL = "SL"
    LL = "LL"


def _in_shifted(a: TauNumber, offset: TauNumber, k: int) -> bool:
    """Is a in offset + tau^k Z_tau^+ ?"""
    rest = a - offset
    if rest < ZERO:
        return False
    return is_tau_integer(rest.times_tau_power(-k))


def classify(a: TauNumber) -> GapClass:
    """Gap class of a positive tau-integer: LS, SL or LL."""
    return beta_mu(a)[2]


def beta_mu(a: TauNumber):
    """Return (beta, mu, class) with a = beta + mu, beta in {1, tau, tau^2}."""
    a = TauNumber.of(a)
    if not a > ZERO or not is_tau_integer(a):
        raise DomainError(f"{a} is not a positive tau-integer")
    hits = []
    if _in_shifted(a, ONE, 2):
        hits.append((ONE, GapClass.LS))
    if _in_shifted(a, TAU_N, 2):
        hits.append((TAU_N, GapClass.SL))
    if _in_shifted(a, tau_power(2), 3):
        hits.append((tau_power(2), GapClass.LL))
    if len(hits) != 1:
        raise DomainError(f"{a} lies in {len(hits)} classes; expected exactly one")
    beta, cls = hits[0]
    return beta, a - beta, cls


def beta_mu_at_level(b: TauNumber, k: int):
    """beta/mu decomposition of a knot b of tau^{-k} Z_tau^+, by rescaling to level 0."""
    return beta_mu(TauNumber.of(b).times_tau_power(k))


# ---------------------------------------------------------------------------
# windows

ENDPOINT = "endpoint"
CUT = "cut"


@dataclass(frozen=True)
class KnotWindow:
    """A finite, strictly increasing run of knots.

    ``left_role``/``right_role`` say whether the first/last knot is a true
    end of the domain ("endpoint") or merely where the window was cut ("cut").
    ``exact`` optionally carries the knots as TauNumbers together with the
    lattice ``level`` k (knots are tau^{-k} times the stored integers).
    """

    knots: tuple
    left_role: str = ENDPOINT
    right_role: str = ENDPOINT
    exact: tuple | None = None
    level: int | None = None

    def __post_init__(self):
        ks = tuple(float(x) for x in self.knots)
        object.__setattr__(self, "knots", ks)
        if len(ks) < 3:
            raise ContractError("a knot window needs at least three knots")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ContractError("knots must be strictly increasing")
        for role in (self.left_role, self.right_role):
            if role not in (ENDPOINT, CUT):
                raise ContractError(f"unknown role {role!r}")
        if self.exact is not None:
            ex = tuple(TauNumber.of(x) for x in self.exact)
            if len(ex) != len(ks):
                raise ContractError("exact knots do not match float knots")
            object.__setattr__(self, "exact", ex)

    @classmethod
    def from_tau(cls, exact: Sequence[TauNumber], level: int = 0, left_role=ENDPOINT, right_role=CUT):
        """Window of tau^{-level} times the given tau-integers."""
        ex = tuple(TauNumber.of(x) for x in exact)
        ks = tuple(float(x.times_tau_power(-level)) for x in ex)
        return cls(ks, left_role, right_role, ex, level)

    def __len__(self):
        return len(self.knots)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.knots)

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.knots[0]), abs(self.knots[-1]))

    def index(self, a) -> int:
        """Position of knot a (float or TauNumber) in the window."""
        if isinstance(a, TauNumber) and self.exact is not None:
            if a in self.exact:
                return self.exact.index(a)
            raise KnotNotFoundError(f"{a} is not a knot of this window")
        x = float(a)
        i = int(np.argmin(np.abs(self.array - x)))
        if abs(self.knots[i] - x) > 1e-12 * self.scale:
            raise KnotNotFoundError(f"{a} is not a knot of this window")
        return i

    def successor(self, a) -> float:
        i = self.index(a)
        if i + 1 < len(self.knots):
            return self.knots[i + 1]
        if self.right_role == ENDPOINT:
            return math.inf
        raise WindowCutError(f"successor of {a} lies beyond the window cut")

    def predecessor(self, a) -> float:
        i = self.index(a)
        if i > 0:
            return self.knots[i - 1]
        if self.left_role == ENDPOINT:
            return -math.inf
        raise WindowCutError(f"predecessor of {a} lies before the window cut")

    def has_successor(self, i: int) -> bool:
        return i + 1 < len(self.knots)

    def is_interior(self, i: int) -> bool:
        """Knot i has both neighbours inside the window."""
        return 0 < i < len(self.knots) - 1

    def at_left_end(self, i: int) -> bool:
        return i == 0 and self.left_role == ENDPOINT

    def at_right_end(self, i: int) -> bool:
        return i == len(self.knots) - 1 and self.right_role == ENDPOINT

    def trusted(self, i: int, margin: int = 2) -> bool:
        """Whether knot i is at least ``margin`` knots away from every cut."""
        if self.left_role == CUT and i < margin:
            return False
        if self.right_role == CUT and i > len(self.knots) - 1 - margin:
            return False
        return True

    def label(self, i: int) -> str:
        if self.exact is not None:
            return str(self.exact[i])
        return repr(self.knots[i])

    def to_json(self) -> dict:
        if self.exact is not None:
            knots = [x.to_json() for x in self.exact]
        else:
            knots = list(self.knots)
        out = {"knots": knots, "left_role": self.left_role, "right_role": self.right_role}
        if self.level is not None:
            out["level"] = self.level
        return out

    @classmethod
    def from_json(cls, data) -> "KnotWindow":
        if isinstance(data, str):
            data = json.loads(data)
        knots = data["knots"]
        left = data.get("left_role", ENDPOINT)
        right = data.get("right_role", ENDPOINT)
        if knots and isinstance(knots[0], dict):
            return cls.from_tau([TauNumber(k["p"], k["q"]) for k in knots], data.get("level", 0), left, right)
        return cls(tuple(knots), left, right)


def tau_window(level: int, count: int, right_role: str = CUT) -> KnotWindow:
    """Level-``level`` lattice knots covering the span of the first ``count`` tau-integers."""
    base = tau_integers(count)
    top = base[-1].times_tau_power(level)
    ex = tau_integers_upto(top)
    return KnotWindow.from_tau(ex, level, ENDPOINT, right_role)


def refine(w: KnotWindow) -> KnotWindow:
    """Insert the next-level lattice points into the long gaps of a lattice window."""
    if w.exact is None or w.level is None:
        raise ContractError("refine needs a window of exact lattice knots")
    out = [w.exact[0]]
    for a, b in zip(w.exact, w.exact[1:]):
        gap = b - a  # in level-k integer units
        if gap == LONG:
            out.append(a + SHORT)
        elif gap != SHORT:
            raise ContractError(f"gap {gap} between {a} and {b} is not a lattice gap")
        out.append(b)
    # level k+1 stores knots multiplied by tau
    ex = [x.times_tau_power(1) for x in out]
    return KnotWindow.from_tau(ex, w.level + 1, w.left_role, w.right_role)
