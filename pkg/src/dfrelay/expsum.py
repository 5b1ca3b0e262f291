"""Exponential polynomials  f(u) = sum c * u**p * exp(-b*u)  in normalized SNR u.

Every CDF and survival function used by the rate formulas lives in this class:
it is closed under sums, products, integer powers and integration from 0.
Coefficients keep whatever numeric type they are built from, so integer and
``Fraction`` inputs give exact results; float coefficients are pruned relative
to the largest one.

Units: ``u = x / snr_scale``, which makes every decay a small integer.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from .model import ConfigurationError, ParameterError, ResourceError

TERM_CAP = 10**6
PRUNE_RTOL = 1e-14
EVAL_ATOL = 1e-13


class ConsistencyError(ArithmeticError):
    """An expansion violated an identity it is known to satisfy."""


def _is_exact(c) -> bool:
    return isinstance(c, Rational)


class ExpPoly:
    """Immutable map ``(power, decay) -> coefficient``."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None, cap: int = TERM_CAP):
        merged = {}
        for key, c in (terms.items() if isinstance(terms, dict) else (terms or ())):
            p, b = key
            if int(p) != p or p < 0 or int(b) != b or b < 0:
                raise ValueError(f"power and decay must be nonnegative integers, got {key}")
            key = (int(p), int(b))
            merged[key] = merged.get(key, 0) + c
        self._terms = _normalize(merged, cap)

    # constructors -----------------------------------------------------
    @classmethod
    def const(cls, c=1) -> "ExpPoly":
        return cls({(0, 0): c})

    @classmethod
    def exp(cls, decay: int, coeff=1, power: int = 0) -> "ExpPoly":
        """``coeff * u**power * exp(-decay*u)``."""
        return cls({(power, decay): coeff})

    @classmethod
    def _raw(cls, terms: dict, cap: int = TERM_CAP) -> "ExpPoly":
        obj = cls.__new__(cls)
        obj._terms = _normalize(terms, cap)
        return obj

    # inspection -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        """Yield ``(coeff, power, decay)`` sorted by decay then power."""
        for (p, b) in sorted(self._terms, key=lambda k: (k[1], k[0])):
            yield self._terms[(p, b)], p, b

    @property
    def max_decay(self) -> int:
        return max((b for _, b in self._terms), default=0)

    @property
    def max_power(self) -> int:
        return max((p for p, _ in self._terms), default=0)

    @property
    def is_pure_exponential(self) -> bool:
        return all(p == 0 for p, _ in self._terms)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self._terms.values())

    def coefficient(self, decay: int, power: int = 0):
        return self._terms.get((power, decay), 0)

    def __eq__(self, other):
        if isinstance(other, (int, float, Fraction)):
            other = ExpPoly.const(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    def __repr__(self):
        if not self._terms:
            return "ExpPoly(0)"
        parts = []
        for c, p, b in self:
            s = str(c)
            if p:
                s += f"*u^{p}" if p > 1 else "*u"
            if b:
                s += f"*e^(-{b}u)"
            parts.append(s)
        return "ExpPoly(" + " + ".join(parts) + ")"

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, 0) + c
        return ExpPoly._raw(terms)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, k) -> "ExpPoly":
        return ExpPoly._raw({key: c * k for key, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            return self.scale(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n):
        return pow_int(self, n)

    def dilate(self, k: int) -> "ExpPoly":
        """``f(k*u)`` for a positive integer ``k``."""
        if int(k) != k or k < 1:
            raise ValueError("dilation factor must be a positive integer")
        return ExpPoly._raw({(p, b * k): c * k**p for (p, b), c in self._terms.items()})

    # calculus ---------------------------------------------------------
    def integrate(self) -> "ExpPoly":
        """Antiderivative vanishing at 0, i.e. ``x -> integral_0^x f(u) du``.

        Uses  int_0^x u^p e^{-bu} du = p!/b^{p+1} (1 - e^{-bx} sum_{k<=p} (bx)^k/k!)
        and  x^{p+1}/(p+1)  when b = 0.
        """
        out = {}
        for (p, b), c in self._terms.items():
            if b == 0:
                key = (p + 1, 0)
                out[key] = out.get(key, 0) + _div(c, p + 1)
                continue
            lead = _div(c * math.factorial(p), b ** (p + 1))
            out[(0, 0)] = out.get((0, 0), 0) + lead
            for k in range(p + 1):
                key = (k, b)
                out[key] = out.get(key, 0) - _div(c * math.factorial(p), math.factorial(k) * b ** (p + 1 - k))
        return ExpPoly._raw(out)

    def derivative(self) -> "ExpPoly":
        out = {}
        for (p, b), c in self._terms.items():
            if p:
                out[(p - 1, b)] = out.get((p - 1, b), 0) + c * p
            if b:
                out[(p, b)] = out.get((p, b), 0) - c * b
        return ExpPoly._raw(out)

    # evaluation -------------------------------------------------------
    def __call__(self, u):
        return self.eval(u)

    def eval(self, u):
        """Evaluate at ``u >= 0`` (scalar or array).

        Terms are summed with ``math.fsum``.  Expanded CDFs carry huge
        alternating coefficients, so whenever the rounding bound of the float
        sum exceeds ``EVAL_ATOL`` the point is recomputed with mpmath at a
        precision sized from the term magnitudes.  Large arrays of
        well-conditioned polynomials use Horner in u per decay group.
        """
        u_arr = np.asarray(u, dtype=float)
        if np.any(u_arr < 0):
            raise ValueError("exponential polynomials are evaluated on u >= 0")
        big_coeffs = max((abs(float(c)) for c in self._terms.values()), default=0.0) > 1e6
        if big_coeffs or u_arr.size * len(self._terms) <= 2_000_000:
            flat = [self._eval_scalar(x) for x in u_arr.ravel()]
            return flat[0] if np.ndim(u) == 0 else np.array(flat).reshape(u_arr.shape)
        groups = {}
        for (p, b), c in self._terms.items():
            groups.setdefault(b, {})[p] = float(c)
        total = np.zeros_like(u_arr)
        for b in sorted(groups, reverse=True):
            coeffs = groups[b]
            acc = np.zeros_like(u_arr)
            for p in range(max(coeffs), -1, -1):
                acc = acc * u_arr + coeffs.get(p, 0.0)
            total = total + acc * np.exp(-b * u_arr)
        return float(total) if np.ndim(u) == 0 else total

    def _eval_scalar(self, x: float) -> float:
        x = float(x)
        if x == 0.0:
            at_zero = [c for (p, _), c in self._terms.items() if p == 0]
            if all(_is_exact(c) for c in at_zero):
                return float(sum(at_zero))
            return math.fsum(float(c) for c in at_zero)
        parts = [float(c) * x**p * math.exp(-b * x) for (p, b), c in self._terms.items()]
        magnitude = math.fsum(abs(v) for v in parts)
        if magnitude * 1e-15 <= EVAL_ATOL:
            return math.fsum(parts)
        digits = int(math.log10(magnitude / EVAL_ATOL)) + 20
        with mpmath.workdps(digits):
            mx = mpmath.mpf(x)
            total = mpmath.fsum(_mp_coeff(c) * mx**p * mpmath.exp(-b * mx)
                                for (p, b), c in self._terms.items())
            return float(total)

    def limit_at_infinity(self):
        """Limit as u -> infinity; diverges if a polynomial term has no decay."""
        if any(p > 0 and b == 0 for p, b in self._terms):
            raise ValueError("polynomial term without decay diverges")
        return self._terms.get((0, 0), 0)

    # audit I/O --------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["coeff", "power", "decay"])
        for c, p, b in self:
            writer.writerow([str(c), p, b])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExpPoly":
        rows = csv.DictReader(io.StringIO(text))
        terms = {}
        for row in rows:
            c = row["coeff"]
            coeff = Fraction(c) if "/" in c or c.lstrip("-").isdigit() else float(c)
            terms[(int(row["power"]), int(row["decay"]))] = coeff
        return cls(terms)


def _mp_coeff(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpf(c)


def _div(a, b):
    if _is_exact(a):
        return Fraction(a) / b
    return a / b


def _coerce(x):
    if isinstance(x, ExpPoly):
        return x
    if isinstance(x, (int, float, Fraction)):
        return ExpPoly.const(x)
    return None


def _normalize(terms: dict, cap: int) -> dict:
    out = {}
    floats = [abs(c) for c in terms.values() if not _is_exact(c)]
    floor = PRUNE_RTOL * max(floats) if floats else 0.0
    for k, c in terms.items():
        if c == 0:
            continue
        if isinstance(c, Fraction) and c.denominator == 1:
            c = c.numerator
        if not _is_exact(c) and abs(c) < floor:
            continue
        out[k] = c
    if len(out) > cap:
        raise ResourceError(f"expansion has {len(out)} terms, above the cap of {cap}")
    return out


def add(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    return f + g


def scale(f: ExpPoly, k) -> ExpPoly:
    return f.scale(k)


def mul(f: ExpPoly, g: ExpPoly, cap: int = TERM_CAP) -> ExpPoly:
    if len(f) > len(g):
        f, g = g, f
    out = {}
    for (p1, b1), c1 in f._terms.items():
        for (p2, b2), c2 in g._terms.items():
            key = (p1 + p2, b1 + b2)
            out[key] = out.get(key, 0) + c1 * c2
        if len(out) > cap:
            raise ResourceError(f"product exceeds the cap of {cap} terms")
    return ExpPoly._raw(out, cap)


def pow_int(f: ExpPoly, n: int, cap: int = TERM_CAP) -> ExpPoly:
    """``f**n`` by repeated squaring."""
    if int(n) != n or n < 0:
        raise ValueError(f"exponent must be a nonnegative integer, got {n!r}")
    result = ExpPoly.const(1)
    base = f
    n = int(n)
    while n:
        if n & 1:
            result = mul(result, base, cap)
        n >>= 1
        if n:
            base = mul(base, base, cap)
    return result


def integrate(f: ExpPoly) -> ExpPoly:
    return f.integrate()


def integrate_ordered(factors, weight: ExpPoly | None = None) -> ExpPoly:
    """Integral of ``prod_i w(g_i) * factors[i](g_i)`` over ``0 < g_1 < ... < g_n <= x``.

    ``factors[i]`` is a univariate ExpPoly applied to the i-th ordered
    variable.  The simplex is swept from the smallest variable upward, so each
    step is a one-dimensional integral from 0:
    ``F_i(s) = int_0^s F_{i-1}(g) w(g) factors[i](g) dg``.
    """
    acc = ExpPoly.const(1)
    for fac in factors:
        integrand = acc * fac
        if weight is not None:
            integrand = integrand * weight
        acc = integrand.integrate()
    return acc


# ---------------------------------------------------------------------------
# distribution families (normalized units)

E = ExpPoly.exp


def _one_minus_exp_power(decay: int, m: int) -> ExpPoly:
    """(1 - e^{-decay u})^m."""
    return pow_int(1 - E(decay), m)


def _check(M, L, min_hops=2):
    if int(M) != M or M < 1:
        raise ConfigurationError(f"relays per hop must be an integer >= 1, got {M!r}")
    if int(L) != L or L < min_hops:
        raise ConfigurationError(f"hops must be an integer >= {min_hops}, got {L!r}")


def survival_hop(M: int, L: int) -> ExpPoly:
    """Bottleneck survival under hop-by-hop selection:
    e^{-u} (1 - (1-e^{-u})^M)^{L-1}."""
    _check(M, L)
    return E(1) * pow_int(1 - _one_minus_exp_power(1, M), L - 1)


def survival_adhoc(M: int, L: int) -> ExpPoly:
    """(1 - (1-e^{-2u})^M) (1 - (1-e^{-u})^M)^{L-2}."""
    _check(M, L)
    return (1 - _one_minus_exp_power(2, M)) * pow_int(1 - _one_minus_exp_power(1, M), L - 2)


def block_stage_survival(M: int) -> ExpPoly:
    """Survival of a non-final two-hop block: 1 - (1 - e^{-u}(1-(1-e^{-u})^M))^M."""
    inner = E(1) * (1 - _one_minus_exp_power(1, M))
    return 1 - pow_int(1 - inner, M)


def survival_block(M: int, L: int) -> ExpPoly:
    """Block-by-block selection with two-hop blocks (L even)."""
    _check(M, L)
    if L % 2:
        raise ParameterError(f"two-hop blocks need an even number of hops, got L={L}")
    T = L // 2
    return (1 - _one_minus_exp_power(2, M)) * pow_int(block_stage_survival(M), T - 1)


def dp_cdf(M: int, L: int) -> ExpPoly:
    """CDF of the DP value V(1, L) with stage values treated as independent.

    F_1 = 1 - e^{-u};  F_l = (1 - e^{-u} (1 - F_{l-1}))^M.
    """
    _check(M, L)
    F = 1 - E(1)
    for _ in range(L - 1):
        F = pow_int(1 - E(1) * (1 - F), M)
    return F


def dp_degree(M: int, L: int) -> int:
    """Largest decay of :func:`dp_cdf`: 2 M^{L-1} + sum_{l=1}^{L-2} M^l."""
    return 2 * M ** (L - 1) + sum(M**l for l in range(1, L - 1))


def survival_optimal_indep(M: int, L: int, cap: int = TERM_CAP) -> ExpPoly:
    """1 - (1 - e^{-Lu})^Q with Q = M^{L-1} independent paths."""
    _check(M, L)
    Q = M ** (L - 1)
    if Q + 1 > cap:
        raise ResourceError(f"Q={Q} paths exceeds the term cap {cap}")
    return 1 - pow_int(1 - E(L), Q, cap)


def _selection_mass(M: int, N: int, k: int) -> ExpPoly:
    """Contribution of the k-th smallest first-hop link (of N below threshold)
    to the probability that the window picks a link below threshold:

    (M-N)/(M-k) (1-e^{-g})^{M(M-k)} - (M-N)/(M-k+1) (1-e^{-g})^{M(M-k+1)}
    """
    a = Fraction(M - N, M - k)
    b = Fraction(M - N, M - k + 1)
    return _one_minus_exp_power(1, M * (M - k)) * a - _one_minus_exp_power(1, M * (M - k + 1)) * b


def sliding_window_cdf(M: int) -> ExpPoly:
    """CDF of the first-hop SNR committed by a two-hop sliding window.

    The window picks relay ``argmax_i min(g_i, max_j h_ij)`` and commits only
    the first hop g_i.  Conditioning on how many first-hop links N fall below
    the threshold (P(M, N) ordered ways to place them) gives

        F(x) = (1-e^{-x})^M + sum_{N=1}^{M-1} P(M,N) e^{-(M-N)x}
               * int_{0<g_1<...<g_N<=x} sum_k mass_k(g_k) prod e^{-g_i}.
    """
    _check(M, 2)
    if M > 5:
        raise ResourceError("sliding-window expansion is supported for M <= 5")
    F = _one_minus_exp_power(1, M)
    weight = E(1)
    for N in range(1, M):
        region = ExpPoly()
        for k in range(1, N + 1):
            factors = [ExpPoly.const(1)] * N
            factors[k - 1] = _selection_mass(M, N, k)
            region = region + integrate_ordered(factors, weight)
        F = F + E(M - N) * region * math.perm(M, N)
    survival = 1 - F
    if not survival.is_pure_exponential:
        residual = max(abs(float(c)) for (p, _), c in survival.terms.items() if p > 0)
        if residual > 1e-10:
            raise ConsistencyError(f"polynomial terms did not cancel (max |c| = {residual:g})")
        survival = ExpPoly._raw({k: c for k, c in survival.terms.items() if k[0] == 0})
        F = 1 - survival
    if len(survival) > M * M * (M * M - 1) and M > 1:
        raise ConsistencyError(f"window survival has {len(survival)} terms, more than M^2(M^2-1)")
    return F


def survival_sliding(M: int, L: int) -> ExpPoly:
    """Two-hop sliding window under the independent-window model:
    (1 - (1-e^{-2u})^M) (1 - F_window)^{L-2}."""
    _check(M, L)
    if M > 5:
        raise ResourceError("sliding-window expansion is supported for M <= 5")
    return (1 - _one_minus_exp_power(2, M)) * pow_int(1 - sliding_window_cdf(M), L - 2)
