import math

import mpmath
import numpy as np
import pytest

from dfrelay import analytic as an
from dfrelay import expsum as ex
from dfrelay.analytic import (
    AnalyticError,
    Method,
    RateValue,
    analytic_rate,
    exp_scaled_e1,
    rate_adhoc,
    rate_block,
    rate_by_quadrature,
    rate_from_survival,
    rate_hop,
    rate_optimal_dp,
    rate_optimal_indep,
    rate_sliding,
    sum_rate_multiuser,
)
from dfrelay.expsum import E, ExpPoly
from dfrelay.model import ConfigurationError, ParameterError

LN2 = math.log(2)
SCALES = (0.1, 1.0, 10.0, 100.0)


def g_ref(y):
    with mpmath.workdps(50):
        return mpmath.exp(y) * mpmath.e1(y)


# ---------------------------------------------------------------- e^y E1(y)

def test_scaled_e1_known_values():
    assert exp_scaled_e1(1.0) == pytest.approx(0.596347362323194, rel=1e-14)
    assert exp_scaled_e1(1e4) == pytest.approx(9.999000199940e-5, rel=1e-12)
    # small-argument asymptote -ln y - gamma
    assert exp_scaled_e1(1e-6) == pytest.approx(-math.log(1e-6) - an.EULER_GAMMA, abs=2e-5)
    with pytest.raises(ValueError):
        exp_scaled_e1(0.0)


def test_scaled_e1_against_high_precision():
    ys = np.logspace(-6, 6, 10_000)
    worst = max(abs(exp_scaled_e1(y) / float(g_ref(y)) - 1) for y in ys)
    assert worst < 1e-10


def test_scaled_e1_sum_cancellation():
    # S = 1 - (1 - e^{-5u})^81 has binomial coefficients up to ~1e23
    S = ex.survival_optimal_indep(3, 5)
    closed = rate_from_survival(S, 1.0).rate
    quad = rate_by_quadrature(lambda u: -np.expm1(81 * np.log1p(-np.exp(-5 * u))), 1.0).rate
    assert closed == pytest.approx(quad, rel=1e-8)


# ---------------------------------------------------------------- rate_from_survival

def test_rate_from_survival_examples():
    r = rate_from_survival(E(1), 1.0)
    assert r.rate == pytest.approx(exp_scaled_e1(1.0) / LN2, rel=1e-14)
    assert r.rate == pytest.approx(0.860347, abs=1e-6)
    r2 = rate_from_survival(E(1, 2) - E(2), 1.0).rate
    assert r2 == pytest.approx((2 * exp_scaled_e1(1) - exp_scaled_e1(2)) / LN2, rel=1e-13)
    # with scale 1, decay 2 means y = 2 / 1: check against quadrature of the survival itself
    assert r2 == pytest.approx(rate_by_quadrature(lambda u: 2 * np.exp(-u) - np.exp(-2 * u), 1.0).rate, rel=1e-10)


def test_rate_from_survival_guards():
    with pytest.raises(AnalyticError):
        rate_from_survival(E(1, 2), 1.0)
    with pytest.raises(AnalyticError):
        rate_from_survival(ExpPoly.const(1), 1.0)
    with pytest.raises(ConfigurationError):
        rate_from_survival(E(1), 0.0)
    with pytest.raises(AnalyticError):
        RateValue(-1.0, Method.HOP)


def test_rate_vanishes_with_snr():
    rates = [rate_from_survival(E(2), s).rate for s in (1.0, 1e-1, 1e-2, 1e-4)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert rates[-1] < 1e-3


def test_terms_with_powers_use_quadrature():
    S = (1 + E(0, 1, power=1)) * E(1)  # (1+u) e^{-u}, survival of a Gamma(2) variable
    ref = rate_by_quadrature(lambda u: (1 + u) * np.exp(-u), 2.0).rate
    assert rate_from_survival(S, 2.0).rate == pytest.approx(ref, rel=1e-10)


def _factored(name, M, L):
    """Survival written directly as products of powers, evaluated in floats."""
    def one_minus_pow(decay, m, u):
        return -np.expm1(m * np.log1p(-np.exp(-decay * u)))

    if name == "hop":
        return lambda u: np.exp(-u) * one_minus_pow(1, M, u) ** (L - 1)
    if name == "adhoc":
        return lambda u: one_minus_pow(2, M, u) * one_minus_pow(1, M, u) ** (L - 2)
    if name == "block":
        def stage(u):
            inner = np.exp(-u) * one_minus_pow(1, M, u)
            return -np.expm1(M * np.log1p(-inner))
        return lambda u: one_minus_pow(2, M, u) * stage(u) ** (L // 2 - 1)
    if name == "indep":
        return lambda u: one_minus_pow(L, M ** (L - 1), u)
    if name == "dp":
        def survival(u):
            G = np.exp(-u)
            for _ in range(L - 1):
                G = -np.expm1(M * np.log1p(-np.exp(-u) * G))
            return G
        return survival
    raise KeyError(name)


CASES = [(n, M, L) for n in ("hop", "adhoc", "indep", "dp") for M in (1, 2, 3) for L in range(2, 6)]
CASES += [("block", M, L) for M in (1, 2, 3) for L in (2, 4, 6)]
BUILDERS = {
    "hop": ex.survival_hop,
    "adhoc": ex.survival_adhoc,
    "block": ex.survival_block,
    "indep": ex.survival_optimal_indep,
    "dp": lambda M, L: 1 - ex.dp_cdf(M, L),
}


@pytest.mark.parametrize("name,M,L", CASES)
def test_closed_form_matches_adaptive_quadrature(name, M, L):
    S = BUILDERS[name](M, L)
    fn = _factored(name, M, L)
    for s in (1.0, 10.0):
        closed = rate_from_survival(S, s).rate
        quad = rate_by_quadrature(fn, s).rate
        assert closed == pytest.approx(quad, rel=1e-8)


def test_sliding_closed_form_matches_quadrature():
    for M in (1, 2, 3):
        G = 1 - ex.sliding_window_cdf(M)
        for L in (2, 3, 5):
            S = ex.survival_sliding(M, L)
            fn = lambda u: -np.expm1(M * np.log1p(-np.exp(-2 * u))) * G.eval(u) ** (L - 2)
            assert rate_from_survival(S, 10.0).rate == pytest.approx(rate_by_quadrature(fn, 10.0).rate, rel=1e-8)


# ---------------------------------------------------------------- closed forms

@pytest.mark.parametrize("fn", [rate_hop, rate_adhoc, rate_optimal_indep])
def test_closed_and_survival_routes_agree(fn):
    for M in (1, 2, 3):
        for L in range(2, 7):
            for s in SCALES:
                a = fn(M, L, s).rate
                b = fn(M, L, s, route="survival").rate
                assert a == pytest.approx(b, rel=1e-9)


def test_block_routes_agree():
    for M in (1, 2, 3):
        for L in (2, 4, 6):
            for s in SCALES:
                assert rate_block(M, L, s).rate == pytest.approx(rate_block(M, L, s, route="survival").rate, rel=1e-9)


def test_single_relay_reduces_to_chain():
    for L in (2, 3, 5):
        for s in (1.0, 10.0):
            chain = exp_scaled_e1(L / s) / LN2
            for fn in (rate_hop, rate_adhoc, rate_optimal_indep, rate_optimal_dp, rate_sliding):
                assert fn(1, L, s).rate == pytest.approx(chain, rel=1e-12)
            if L % 2 == 0:
                assert rate_block(1, L, s).rate == pytest.approx(chain, rel=1e-12)


def test_two_hop_degenerate_cases():
    for M in (2, 3):
        adhoc = rate_adhoc(M, 2, 10.0).rate
        assert rate_block(M, 2, 10.0).rate == pytest.approx(adhoc, rel=1e-12)
        assert rate_sliding(M, 2, 10.0).rate == pytest.approx(adhoc, rel=1e-12)
        assert rate_optimal_dp(M, 2, 10.0).rate == pytest.approx(rate_optimal_indep(M, 2, 10.0).rate, rel=1e-12)


def test_orderings_and_monotonicity():
    for s in (1.0, 10.0):
        for L in range(3, 7):
            assert rate_adhoc(2, L, s).rate >= rate_hop(2, L, s).rate
    for fn in (rate_hop, rate_adhoc, rate_optimal_dp, rate_sliding):
        by_snr = [fn(2, 4, s).rate for s in SCALES]
        assert by_snr == sorted(by_snr)
        by_hops = [fn(2, L, 10.0).rate for L in range(2, 7)]
        assert by_hops == sorted(by_hops, reverse=True)


def test_reference_values():
    assert rate_hop(2, 4, 10.0).rate == pytest.approx(2.19667, abs=1e-5)
    assert rate_adhoc(2, 4, 10.0).rate == pytest.approx(2.39911, abs=1e-5)
    assert rate_block(2, 4, 10.0).rate == pytest.approx(2.45489, abs=1e-5)


def test_dispatch_and_multiuser():
    assert analytic_rate("adhoc", 2, 4, 10.0).rate == rate_adhoc(2, 4, 10.0).rate
    assert analytic_rate("optimal", 2, 4, 10.0, optimal="indep").method is Method.INDEPENDENT_PATHS
    assert analytic_rate("brute", 2, 4, 10.0).method is Method.DP_APPROX
    with pytest.raises(ParameterError):
        analytic_rate("sliding", 2, 4, 10.0, w=3)
    with pytest.raises(ParameterError):
        rate_block(2, 5, 10.0)
    with pytest.raises(ParameterError):
        rate_hop(2, 4, 10.0, route="numeric")
    with pytest.raises(ConfigurationError):
        analytic_rate("zigzag", 2, 4, 10.0)
    base = RateValue(0.5, Method.HOP)
    assert sum_rate_multiuser(3, base).rate == 1.5
    assert sum_rate_multiuser(1, base) == base
    with pytest.raises(ParameterError):
        sum_rate_multiuser(0, base)
