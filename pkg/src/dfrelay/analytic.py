"""Closed-form achievable rates.

For a bottleneck SNR with survival ``S(x) = sum_q c_q exp(-b_q x / s)`` the
mean rate is

    E[log2(1 + X)] = 1/ln2 * int_0^inf S(x) / (1 + x) dx
                   = 1/ln2 * sum_q c_q * g(b_q / s),     g(y) = e^y E1(y).

The closed-form coefficient sums (multinomial enumeration) and the survival
pipeline in :mod:`dfrelay.expsum` are two independent routes to the same
numbers and are cross-checked in the tests.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from scipy import integrate

from . import expsum
from .expsum import ExpPoly
from .model import ConfigurationError, ParameterError, ResourceError

LN2 = math.log(2.0)
EULER_GAMMA = 0.57721566490153286060651209
COMPOSITION_CAP = 10**6


class AnalyticError(ArithmeticError):
    """Divergent or otherwise ill-posed rate integral."""


class Method(str, enum.Enum):
    INDEPENDENT_PATHS = "indep_paths"
    DP_APPROX = "dp_approx"
    HOP = "hop"
    ADHOC = "adhoc"
    BLOCK = "block"
    SLIDING = "sliding"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class RateValue:
    rate: float
    method: Method

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise AnalyticError(f"rate must be finite and nonnegative, got {self.rate}")

    def __float__(self):
        return self.rate


# ---------------------------------------------------------------------------
# e^y E1(y)

def _scaled_e1_series(y: float) -> float:
    # E1(y) = -gamma - ln y - sum_{k>=1} (-y)^k / (k k!)
    total, term, k = 0.0, 1.0, 1
    while True:
        term *= -y / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * abs(total) or k > 200:
            break
        k += 1
    return math.exp(y) * (-EULER_GAMMA - math.log(y) - total)


def _scaled_e1_cf(y: float) -> float:
    # e^y E1(y) = 1/(y+1- 1/(y+3- 4/(y+5- ...))), modified Lentz
    tiny = 1e-300
    b = y + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def exp_scaled_e1(y: float) -> float:
    """``g(y) = exp(y) * E1(y) = -exp(y) * Ei(-y)`` for ``y > 0``.

    Power series below 1, continued fraction above; ``exp(y)`` is never
    formed for large ``y``, so huge arguments (low SNR) do not overflow.
    """
    if not y > 0:
        raise ValueError(f"exp_scaled_e1 needs y > 0, got {y}")
    if math.isinf(y):
        return 0.0
    if y < 1.0:
        return _scaled_e1_series(y)
    return _scaled_e1_cf(y)


def _exp_scaled_e1_mp(y) -> mpmath.mpf:
    return mpmath.exp(y) * mpmath.e1(y)


# ---------------------------------------------------------------------------
# rate integrals

def scaled_e1_sum(pairs, snr_scale: float) -> float:
    """``sum_q c_q * g(b_q / snr_scale)`` for ``(c_q, b_q)`` pairs, b_q > 0.

    Coefficients with equal decay are merged first (exactly, if they are
    exact).  When the alternating sum loses more than a few digits to
    cancellation it is redone in multiprecision.
    """
    merged = defaultdict(int)
    for c, b in pairs:
        merged[b] += c
    terms = [(c, b) for b, c in merged.items() if c != 0]
    if any(b <= 0 for _, b in terms):
        raise AnalyticError("zero-decay term in a rate integral diverges")
    values = [float(c) * exp_scaled_e1(b / snr_scale) for c, b in terms]
    total = math.fsum(values)
    magnitude = math.fsum(abs(v) for v in values)
    if magnitude == 0.0:
        return 0.0
    if magnitude * 1e-15 <= 1e-13 * abs(total):
        return total
    # the float total may be pure noise here, so size the precision from the
    # magnitude alone and grow it until the result is well conditioned
    estimate = min(abs(total), 1.0)
    digits = max(30, int(math.log10(magnitude / max(estimate, 1e-30))) + 25)
    for _ in range(6):
        with mpmath.workdps(digits):
            s = mpmath.mpf(snr_scale)
            acc = mpmath.mpf(0)
            for c, b in terms:
                coeff = mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpmath.mpf(c)
                acc += coeff * _exp_scaled_e1_mp(mpmath.mpf(b) / s)
        lost = math.log10(magnitude / max(abs(float(acc)), 1e-300))
        if digits - lost >= 20:
            return float(acc)
        digits = int(lost) + 30
    raise AnalyticError("rate sum could not be evaluated to working precision")


def _quad_positive(fn, snr_scale: float) -> float:
    """(1/ln2) int_0^inf fn(x / snr_scale) / (1 + x) dx by adaptive quadrature."""
    def integrand(x):
        return fn(x / snr_scale) / (1.0 + x)

    total = 0.0
    breaks = [0.0, snr_scale, 10 * snr_scale, 100 * snr_scale]
    for lo, hi in zip(breaks, breaks[1:]):
        val, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=0.0, epsrel=1e-12)
        total += val
    val, _ = integrate.quad(integrand, breaks[-1], math.inf, limit=400, epsabs=0.0, epsrel=1e-12)
    return (total + val) / LN2


def rate_by_quadrature(survival, snr_scale: float) -> RateValue:
    """Rate from any survival callable of the normalized SNR, by quadrature."""
    return RateValue(_quad_positive(survival, snr_scale), Method.QUADRATURE)


def rate_from_survival(S: ExpPoly, snr_scale: float, method: Method = Method.QUADRATURE) -> RateValue:
    """Mean rate for a bottleneck whose survival (in normalized units) is ``S``.

    Pure-exponential terms use the closed form; terms carrying a power of u
    are integrated numerically.
    """
    if not snr_scale > 0:
        raise ConfigurationError(f"snr_scale must be positive, got {snr_scale}")
    if abs(S.eval(0.0) - 1.0) > 1e-9:
        raise AnalyticError(f"not a survival function: S(0) = {S.eval(0.0)}")
    closed, residual = [], {}
    for c, p, b in S:
        if b == 0:
            raise AnalyticError("survival has a term without decay; the rate integral diverges")
        if p == 0:
            closed.append((c, b))
        else:
            residual[(p, b)] = c
    rate = scaled_e1_sum(closed, snr_scale) / LN2
    if residual:
        rate += _quad_positive(ExpPoly(residual).eval, snr_scale)
    return RateValue(max(rate, 0.0), method)


# ---------------------------------------------------------------------------
# multinomial sums

def compositions(total: int, parts: int):
    """Nonnegative integer tuples of length ``parts`` summing to ``total``,
    in colexicographic order (last entry varies slowest)."""
    if parts == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for head in compositions(total - last, parts - 1):
            yield head + (last,)


def _n_compositions(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


def multinomial(ls) -> int:
    out = math.factorial(sum(ls))
    for l in ls:
        out //= math.factorial(l)
    return out


def _guard(total: int, parts: int):
    n = _n_compositions(total, parts)
    if n > COMPOSITION_CAP:
        raise ResourceError(f"{n} multinomial terms exceeds the cap of {COMPOSITION_CAP}")


def hop_terms(M: int, L: int):
    """``(A, beta)`` pairs of the hop-by-hop rate; R = -1/ln2 sum A e^beta Ei(-beta)."""
    _guard(L - 1, M)
    for ls in compositions(L - 1, M):
        A = multinomial(ls)
        sign = 0
        for j, l in enumerate(ls, start=1):
            A *= math.comb(M, j) ** l
            sign += (j - 1) * l
        yield (-A if sign % 2 else A), 1 + sum(j * l for j, l in enumerate(ls, start=1))


def adhoc_terms(M: int, L: int):
    """``(A(i), beta(i))`` pairs of the ad-hoc rate."""
    _guard(L - 2, M)
    for i in range(1, M + 1):
        for ls in compositions(L - 2, M):
            A = math.comb(M, i) * multinomial(ls)
            sign = i - 1
            for j, l in enumerate(ls, start=1):
                A *= math.comb(M, j) ** l
                sign += (j - 1) * l
            yield (-A if sign % 2 else A), 2 * i + sum(j * l for j, l in enumerate(ls, start=1))


def block_terms(M: int, L: int):
    """``(A(i,t), beta(i))`` pairs of the two-hop block rate, followed by the
    final-block pairs ``(C(M,i) (-1)^i, 2i)``.  R = +1/ln2 sum A e^beta Ei(-beta)."""
    if L % 2:
        raise ParameterError(f"two-hop blocks need an even number of hops, got L={L}")
    T = L // 2
    if T > 1:
        _guard(M * (T - 1), M + 1)
    for i in range(1, M + 1):
        for t in range(1, T):
            for ls in compositions(M * t, M + 1):
                A = math.comb(M, i) * math.comb(T - 1, t) * multinomial(ls)
                sign = i + t
                for j, l in enumerate(ls[1:], start=1):
                    A *= math.comb(M, j) ** l
                    sign += j * l
                beta = 2 * i + sum((j + 1) * l for j, l in enumerate(ls[1:], start=1))
                yield (-A if sign % 2 else A), beta
        yield (-1) ** i * math.comb(M, i), 2 * i


def _checked(M, L, route="closed"):
    if int(M) != M or M < 1 or int(L) != L or L < 2:
        raise ConfigurationError(f"need M >= 1 and L >= 2, got M={M!r}, L={L!r}")
    if route not in ("closed", "survival"):
        raise ParameterError(f"route must be 'closed' or 'survival', got {route!r}")


def rate_hop(M: int, L: int, snr_scale: float, route: str = "closed") -> RateValue:
    _checked(M, L, route)
    if route == "survival":
        return rate_from_survival(expsum.survival_hop(M, L), snr_scale, Method.HOP)
    # -Ei(-y) e^y = g(y)
    return RateValue(scaled_e1_sum(hop_terms(M, L), snr_scale) / LN2, Method.HOP)


def rate_adhoc(M: int, L: int, snr_scale: float, route: str = "closed") -> RateValue:
    _checked(M, L, route)
    if route == "survival":
        return rate_from_survival(expsum.survival_adhoc(M, L), snr_scale, Method.ADHOC)
    return RateValue(scaled_e1_sum(adhoc_terms(M, L), snr_scale) / LN2, Method.ADHOC)


def rate_block(M: int, L: int, snr_scale: float, route: str = "closed") -> RateValue:
    _checked(M, L, route)
    if route == "survival":
        return rate_from_survival(expsum.survival_block(M, L), snr_scale, Method.BLOCK)
    # leading + sign with Ei(-y) = -g(y)
    pairs = ((-A, beta) for A, beta in block_terms(M, L))
    return RateValue(scaled_e1_sum(pairs, snr_scale) / LN2, Method.BLOCK)


def rate_optimal_indep(M: int, L: int, snr_scale: float, route: str = "closed") -> RateValue:
    """Optimal-selection rate treating all M^{L-1} paths as independent."""
    _checked(M, L, route)
    Q = M ** (L - 1)
    if route == "survival":
        return rate_from_survival(expsum.survival_optimal_indep(M, L), snr_scale, Method.INDEPENDENT_PATHS)
    if Q > expsum.TERM_CAP:
        raise ResourceError(f"Q={Q} paths exceeds the term cap")
    pairs = (((-1) ** (q + 1) * math.comb(Q, q), L * q) for q in range(1, Q + 1))
    return RateValue(scaled_e1_sum(pairs, snr_scale) / LN2, Method.INDEPENDENT_PATHS)


def rate_optimal_dp(M: int, L: int, snr_scale: float) -> RateValue:
    """Optimal-selection rate from the DP recursion with independent stage values."""
    _checked(M, L)
    return rate_from_survival(1 - expsum.dp_cdf(M, L), snr_scale, Method.DP_APPROX)


def rate_sliding(M: int, L: int, snr_scale: float) -> RateValue:
    """Two-hop sliding-window rate under the independent-window model."""
    _checked(M, L)
    return rate_from_survival(expsum.survival_sliding(M, L), snr_scale, Method.SLIDING)


def sum_rate_multiuser(users: int, base: RateValue) -> RateValue:
    """Noise-limited multi-user sum rate: users times the single-user rate."""
    if int(users) != users or users < 1:
        raise ParameterError(f"number of users must be a positive integer, got {users!r}")
    return RateValue(users * base.rate, base.method)


def analytic_rate(strategy: str, M: int, L: int, snr_scale: float, w: int | None = None,
                  optimal: str = "dp") -> RateValue:
    """Dispatch by strategy name.  Block and sliding formulas exist for w = 2 only."""
    if strategy in ("optimal", "brute"):
        return rate_optimal_dp(M, L, snr_scale) if optimal == "dp" else rate_optimal_indep(M, L, snr_scale)
    if strategy == "hop":
        return rate_hop(M, L, snr_scale)
    if strategy == "adhoc":
        return rate_adhoc(M, L, snr_scale)
    if strategy in ("block", "sliding"):
        if w not in (None, 2):
            raise ParameterError(f"closed-form {strategy} rate is only available for w = 2, got {w}")
        if strategy == "block":
            return rate_block(M, L, snr_scale)
        return rate_sliding(M, L, snr_scale)
    raise ConfigurationError(f"unknown strategy {strategy!r}")
