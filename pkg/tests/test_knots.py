import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from knotwave.errors import ContractError, DomainError, KnotNotFoundError
from knotwave.knots import (
    CUT,
    ENDPOINT,
    LONG,
    SHORT,
    TAU,
    KnotWindow,
    TauNumber,
    beta_mu,
    beta_mu_at_level,
    classify,
    fibonacci_word,
    is_tau_integer,
    refine,
    tau_digits,
    tau_integers,
    tau_integers_upto,
    tau_power,
    tau_window,
)

ints = st.integers(-10**6, 10**6)


@given(ints, ints, ints, ints)
def test_tau_arithmetic_matches_floats(p, q, r, s):
    a, b = TauNumber(p, q), TauNumber(r, s)
    scale = 1 + abs(float(a)) + abs(float(b))
    assert float(a + b) == pytest.approx(float(a) + float(b), abs=1e-9 * scale)
    assert float(a - b) == pytest.approx(float(a) - float(b), abs=1e-9 * scale)
    assert float(a * b) == pytest.approx(float(a) * float(b), rel=1e-9, abs=1e-9 * scale * scale)


@given(ints, ints, st.integers(-8, 8))
def test_tau_power_round_trip(p, q, k):
    a = TauNumber(p, q)
    assert a.times_tau_power(k).times_tau_power(-k) == a
    assert a.times_tau_power(k) == a * tau_power(k) if k >= 0 else True


def test_order_is_exact_near_zero():
    # F_{n+1} - F_n tau alternates in sign and shrinks like tau^{-n}
    f = [0, 1]
    for _ in range(60):
        f.append(f[-1] + f[-2])
    for n in range(2, 60):
        x = TauNumber(f[n + 1], -f[n])
        want = 1 if n % 2 == 0 else -1
        assert x.sign() == want, n
        assert (x > TauNumber(0)) == (want > 0)


def test_float_conversion_avoids_cancellation():
    x = TauNumber(832040, -514229)  # F_30 - F_29 tau = (-1)^29 tau^-29
    assert float(x) == pytest.approx(-(TAU ** -29), rel=1e-12)


def _brute_tau_integers(max_power):
    """Oracle: all sums of distinct powers tau^k, no two consecutive, sorted (floats)."""
    vals = {0.0}
    powers = range(max_power + 1)
    for m in range(1, max_power + 2):
        for combo in itertools.combinations(powers, m):
            if all(b - a >= 2 for a, b in zip(combo, combo[1:])):
                vals.add(sum(TAU**k for k in combo))
    return sorted(vals)


def test_tau_integers_match_enumeration():
    brute = _brute_tau_integers(9)
    ours = [float(x) for x in tau_integers(40)]
    assert np.allclose(ours, brute[:40], atol=1e-9)
    assert [str(x) for x in tau_integers(6)] == ["0", "1", "tau", "1+tau", "2+tau", "1+2*tau"]


def test_fibonacci_word():
    assert fibonacci_word(21) == "LSLLSLSLLSLLSLSLLSLSL"
    w = fibonacci_word(200)
    image = "".join("LS" if c == "L" else "L" for c in w)
    assert image[:200] == w  # fixed point of the substitution
    gaps = [y - x for x, y in zip(tau_integers(201), tau_integers(201)[1:])]
    assert "".join("L" if g == LONG else "S" for g in gaps) == w
    assert all(g in (LONG, SHORT) for g in gaps)


@given(st.integers(1, 300))
def test_beta_mu_decomposition(i):
    ti = tau_integers(302)
    a = ti[i]
    beta, mu, cls = beta_mu(a)
    assert beta + mu == a
    assert beta in (tau_power(0), tau_power(1), tau_power(2))
    assert is_tau_integer(mu)
    # the class spells the gaps on either side of a
    w = fibonacci_word(301)
    assert cls.value == w[i - 1] + w[i]
    assert classify(a) == cls


def test_beta_mu_rejects_non_lattice_points():
    with pytest.raises(DomainError):
        beta_mu(TauNumber(0))
    with pytest.raises(DomainError):
        beta_mu(TauNumber(2))  # 2 = tau + tau^-2 is not a tau-integer
    with pytest.raises(DomainError):
        tau_digits(TauNumber(-1))


def test_beta_mu_at_level_rescales():
    b = TauNumber(1, 1)  # tau^2 at level 1 is the real number tau
    assert beta_mu_at_level(b, 0)[0] == tau_power(2)
    assert beta_mu_at_level(TauNumber(0, 1), 1)[0] == tau_power(2)


@given(st.integers(0, 4), st.integers(5, 30))
def test_refine_contains_coarse_and_matches_next_level(k, count):
    a = tau_window(k, count)
    b = refine(a)
    assert set(a.exact) <= set(b.exact)
    assert b.exact == tau_window(k + 1, count).exact
    assert b.level == k + 1
    assert all(np.min(np.abs(b.array - x)) < 1e-12 * b.scale for x in a.array)


def test_upto_is_inclusive():
    top = tau_integers(12)[-1]
    assert tau_integers_upto(top) == tau_integers(12)


def test_window_contract():
    with pytest.raises(ContractError):
        KnotWindow((0.0, 1.0))
    with pytest.raises(ContractError):
        KnotWindow((0.0, 2.0, 1.0))
    with pytest.raises(ContractError):
        KnotWindow((0.0, 1.0, 2.0), "middle")
    w = KnotWindow((0.0, 1.0, 2.0, 3.0))
    assert w.index(2.0) == 2
    with pytest.raises(KnotNotFoundError):
        w.index(2.5)


def test_trusted_margin_at_cuts_only():
    w = KnotWindow(tuple(range(8)), ENDPOINT, CUT)
    assert [w.trusted(i) for i in range(8)] == [True] * 6 + [False] * 2
    w2 = KnotWindow(tuple(range(8)), ENDPOINT, ENDPOINT)
    assert all(w2.trusted(i) for i in range(8))


def test_window_json_round_trip():
    w = tau_window(1, 10)
    back = KnotWindow.from_json(json.dumps(w.to_json()))
    assert back.exact == w.exact and np.allclose(back.array, w.array)
    v = KnotWindow((0.0, 0.5, 2.0))
    assert KnotWindow.from_json(v.to_json()).knots == v.knots


def test_labels():
    w = tau_window(0, 4)
    assert [w.label(i) for i in range(4)] == ["0", "1", "tau", "1+tau"]
    assert math.isclose(float(tau_power(2)), TAU**2)
