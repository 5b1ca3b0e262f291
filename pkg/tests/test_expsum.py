import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfrelay.expsum import (
    E,
    ExpPoly,
    dp_cdf,
    dp_degree,
    integrate_ordered,
    mul,
    pow_int,
    sliding_window_cdf,
    survival_adhoc,
    survival_block,
    survival_hop,
    survival_optimal_indep,
    survival_sliding,
)

ONE = ExpPoly.const(1)


def test_algebra_by_hand():
    assert (ONE - E(1)) ** 2 == ONE - E(1, 2) + E(2)
    assert pow_int(ONE - E(1), 0) == ONE
    assert mul(E(1, power=1), E(2)) == E(3, power=1)
    assert (E(1) + E(1)).coefficient(1) == 2
    assert len(E(2) - E(2)) == 0


def test_evaluation():
    assert (ONE - E(1)).eval(0.0) == 0.0
    assert E(2).eval(math.log(2)) == pytest.approx(0.25, rel=1e-15)
    assert dp_cdf(2, 4).limit_at_infinity() == 1
    assert float(dp_cdf(3, 3).eval(60.0)) == pytest.approx(1.0, abs=1e-12)
    grid = np.linspace(0, 5, 7)
    f = E(1, 3) - E(2, power=2)
    assert np.allclose(f.eval(grid), 3 * np.exp(-grid) - grid**2 * np.exp(-2 * grid))


def test_integration():
    x = np.linspace(0, 4, 9)
    assert np.allclose(E(1).integrate().eval(x), 1 - np.exp(-x))
    assert np.allclose(ONE.integrate().eval(x), x)
    assert np.allclose(E(1, power=1).integrate().eval(x), 1 - (1 + x) * np.exp(-x))
    # derivative undoes integration
    f = E(3, 2, power=2) + E(0, 5) - E(1, Fraction(1, 3))
    assert f.integrate().derivative() == f


def test_ordered_integral_of_ones_is_simplex_volume():
    # integral over 0 < t1 < ... < tn < s of 1 is s^n / n!
    g = integrate_ordered([ONE, ONE, ONE])
    assert g == E(0, Fraction(1, 6), power=3)


def test_csv_roundtrip():
    f = survival_sliding(3, 4)
    assert ExpPoly.from_csv(f.to_csv()) == f


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 2), st.integers(0, 4)), max_size=5),
       st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 2), st.integers(0, 4)), max_size=5),
       st.floats(0, 6))
def test_product_matches_pointwise_product(a, b, u):
    f = ExpPoly({(p, d): c for c, p, d in a})
    g = ExpPoly({(p, d): c for c, p, d in b})
    lhs = float((f * g).eval(u))
    rhs = float(f.eval(u)) * float(g.eval(u))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_survival_hand_expansions():
    u = 0.37
    assert survival_hop(1, 5) == E(5)
    assert survival_hop(2, 2) == E(2, 2) - E(3)
    assert survival_adhoc(1, 4) == E(4)
    assert survival_adhoc(3, 2) == ONE - (ONE - E(2)) ** 3
    assert survival_adhoc(2, 3) == (E(2, 2) - E(4)) * (E(1, 2) - E(2))
    assert survival_block(1, 4) == E(4)
    assert survival_block(3, 2) == survival_adhoc(3, 2)
    assert survival_optimal_indep(1, 2) == E(2)
    assert survival_optimal_indep(2, 2) == ONE - (ONE - E(2)) ** 2
    assert survival_sliding(1, 5) == E(5)
    assert survival_sliding(2, 2) == E(2, 2) - E(4)
    assert survival_sliding(3, 2) == survival_adhoc(3, 2)
    assert float(survival_sliding(2, 5).eval(u)) <= 1


def test_dp_cdf_degree():
    assert dp_cdf(2, 2) == (ONE - E(2)) ** 2
    assert dp_cdf(2, 2).max_decay == 4 == dp_degree(2, 2)
    assert dp_cdf(2, 3).max_decay == 10 == dp_degree(2, 3)
    assert dp_cdf(1, 3) == ONE - E(3)
    for M in (2, 3):
        for L in (2, 3, 4):
            assert dp_cdf(M, L).max_decay == dp_degree(M, L)


SURVIVALS = [
    ("hop", survival_hop, range(2, 7)),
    ("adhoc", survival_adhoc, range(2, 7)),
    ("block", survival_block, (2, 4, 6)),
    ("indep", survival_optimal_indep, range(2, 6)),
    ("dp", lambda M, L: ONE - dp_cdf(M, L), range(2, 6)),
    ("sliding", survival_sliding, range(2, 7)),
]


@pytest.mark.parametrize("name,fn,hops", SURVIVALS, ids=[s[0] for s in SURVIVALS])
def test_survival_invariants(name, fn, hops):
    grid = np.linspace(0, 20, 401)
    for M in (1, 2, 3):
        for L in hops:
            S = fn(M, L)
            assert S.eval(0.0) == 1
            vals = np.asarray(S.eval(grid), dtype=float)
            assert np.all(np.diff(vals) <= 1e-12)
            assert vals[-1] < 1e-4
            assert S.limit_at_infinity() == 0


def test_window_cdf_limits():
    assert sliding_window_cdf(1) == ONE - E(1)
    for M in (2, 3):
        F = sliding_window_cdf(M)
        assert F.eval(0.0) == 0
        assert F.limit_at_infinity() == 1
        assert F.is_pure_exponential


@pytest.mark.slow
@pytest.mark.parametrize("M", [2, 3])
def test_window_cdf_against_simulation(M):
    """First-hop SNR of the two-hop lookahead choice, one million draws."""
    rng = np.random.default_rng(100 + M)
    n = 1_000_000
    first = rng.exponential(size=(n, M))
    second = rng.exponential(size=(n, M, M)).max(axis=2)
    choice = np.minimum(first, second).argmax(axis=1)
    x = np.sort(first[np.arange(n), choice])
    F = np.asarray(sliding_window_cdf(M).eval(x), dtype=float)
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    ks = max(np.max(np.abs(ecdf_hi - F)), np.max(np.abs(F - ecdf_lo)))
    assert ks < 3e-3
