"""Euler products and Dirichlet series built from the d_k coefficients.

Every product is truncated at a prime cutoff P and carries a rigorous bound
on |log(truncated) - log(full)|.  The bound rests on two facts: the local
factor (1-x)^(k^2) * sum d_k(p^m)^2 x^m has no linear term in x = p^-s, and
its higher coefficients are bounded by 2 when k <= 1.  The tail over p > P
is then dominated through the prime-counting estimate pi(x) < 1.3 x / log x.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath
from mpmath import mp, mpf

from .coeffs import (
    CoefficientTable,
    FractionalOrder,
    HALF,
    double_factorial_coeff,
    prime_power_coeff,
    primes_up_to,
    sieve_coeffs,
)
from .errors import ConvergenceError, DomainError
from .zeta import DEFAULT_CTX, PrecisionContext, gamma

_DEPTH_CAP = 64

# squared prime-power coefficients per (k, prec), index = exponent
_A2_CACHE: dict[tuple, list] = {}
_PRIMES_CACHE: dict[int, list] = {}


def _primes(limit: int) -> list:
    out = _PRIMES_CACHE.get(limit)
    if out is None:
        out = primes_up_to(limit)
        _PRIMES_CACHE[limit] = out
    return out


@dataclass(frozen=True)
class EulerProductSpec:
    """Truncation parameters for an Euler product evaluation."""

    prime_cutoff: int = 10**5
    factor_depth: Optional[int] = None  # None = deep enough for the precision
    precision: PrecisionContext = DEFAULT_CTX

    def __post_init__(self) -> None:
        if self.prime_cutoff < 2:
            raise DomainError(f"prime cutoff must be >= 2, got {self.prime_cutoff}")
        if self.factor_depth is not None and self.factor_depth < 1:
            raise DomainError(f"factor depth must be >= 1, got {self.factor_depth}")


@dataclass(frozen=True)
class ProductValue:
    """A truncated product (or series) value with a rigorous tail bound.

    ``tail_bound`` bounds |log(truncated) - log(full)|; for the series route
    (g_series) it bounds the dropped tail directly in value space, which is
    the same thing to first order and is reported conservatively by
    :meth:`value_error_bound` either way.
    """

    value: mpf
    prime_cutoff: int
    tail_bound: mpf
    precision_bits: int

    def __post_init__(self) -> None:
        if self.tail_bound < 0 or not mpmath.isfinite(self.tail_bound):
            raise DomainError("tail bound must be finite and nonnegative")

    def value_error_bound(self) -> mpf:
        """Bound on the absolute error of ``value`` against the full object."""
        with mp.workprec(64):
            return +(abs(self.value) * mpmath.expm1(self.tail_bound))


def _squared_coeffs(order: FractionalOrder, prec: int, depth: int) -> list:
    key = (order.k, prec)
    cached = _A2_CACHE.get(key)
    if cached is not None and len(cached) > depth:
        return cached
    with mp.workprec(prec):
        out = []
        for m in range(max(depth + 1, _DEPTH_CAP + 1)):
            c = prime_power_coeff(order, m)
            out.append(mpf(c.numerator * c.numerator) / mpf(c.denominator * c.denominator))
    _A2_CACHE[key] = out
    return out


def _auto_depth(p: int, s: mpf, bits: int) -> int:
    """Smallest M with p^(-M s) below the working precision, capped."""
    import math

    need = (bits + 8) * 0.6931471805599453 / (float(s) * math.log(p))
    return max(1, min(_DEPTH_CAP, int(need) + 1))


def local_factor_g(
    p: int,
    s: Union[mpf, float, Fraction],
    k: FractionalOrder = HALF,
    M: Optional[int] = None,
    ctx: PrecisionContext = DEFAULT_CTX,
) -> mpf:
    """Local Euler factor of g: sum_{m<=M} d_k(p^m)^2 p^(-ms).

    The factor converges for s > 1/2 since the coefficients are bounded by 1
    (k <= 1); for k = 1 and s <= 1 the underlying series is zeta itself, so
    the call is rejected rather than silently truncated.
    """
    s = mpf(s)
    if k.k > 1:
        raise DomainError("local factors are provided for 0 < k <= 1 only")
    if s <= mpf(1) / 2:
        raise ConvergenceError(f"local factor diverges for s <= 1/2 (got {s})")
    if k.k == 1 and s <= 1:
        # the k = 1 series g is zeta itself; at s <= 1 deepening the factor
        # never stabilizes the product, so reject instead of truncating
        raise ConvergenceError("k = 1 factors are bottomless for s <= 1")
    with mp.workprec(ctx.workprec):
        if M is None:
            M = _auto_depth(p, s, ctx.workprec)
        a2 = _squared_coeffs(k, ctx.workprec, M)
        x = mpmath.exp(-s * mpmath.log(p))
        acc = a2[M]
        for m in range(M - 1, -1, -1):
            acc = acc * x + a2[m]
        return +acc


def _second_coefficient(order: FractionalOrder) -> Fraction:
    """Exact x^2 coefficient of (1-x)^(k^2) sum d_k(p^m)^2 x^m."""
    q = order.k * order.k
    d1 = prime_power_coeff(order, 1)
    d2 = prime_power_coeff(order, 2)
    return d2 * d2 - q * d1 * d1 + q * (q - 1) / 2


def _tail_log_bound(P: int, sigma: mpf, order: FractionalOrder) -> mpf:
    """Rigorous bound on sum_{p > P} |log local factor| at real s = sigma.

    Valid for k <= 1 and sigma > 1/2: the normalized local factor is
    1 + c2 x^2 + c3 x^3 + ... with |c_m| <= 2 and c2 known exactly.
    """
    if order.k > 1:
        raise DomainError("tail bound machinery assumes k <= 1")
    if 2 * sigma <= 1:
        raise ConvergenceError(f"product tail diverges at sigma = {sigma}")
    with mp.workprec(96):
        c2 = abs(_second_coefficient(order))
        c2 = mpf(c2.numerator) / mpf(c2.denominator)
        logP = mpmath.log(P)
        x0 = mpf(P) ** (-sigma)

        def prime_power_sum(j: int) -> mpf:
            expo = j * sigma
            return mpf("1.3") * expo / ((expo - 1) * logP) * mpf(P) ** (1 - expo)

        total = c2 * prime_power_sum(2) + 2 * prime_power_sum(3) / (1 - x0)
        # per-factor |log(1+u)| <= u/(1-u_max); u_max at the first tail prime
        u_max = c2 * x0**2 + 2 * x0**3 / (1 - x0)
        if u_max >= mpf("0.95"):
            raise ConvergenceError(f"cutoff {P} too small for a useful tail bound")
        return +(total / (1 - u_max))


def _depth_log_slack(primes: list, s: mpf, depths: list, prec: int) -> mpf:
    """Log-space slack for the capped local-factor depths (coefficients <= 1)."""
    with mp.workprec(64):
        total = mpf(0)
        for p, M in zip(primes, depths):
            x = mpf(p) ** (-s)
            total += x ** (M + 1) / (1 - x) * 2
        return +total


def c0_local_series_terms(p: int, count: int) -> list[Fraction]:
    """First ``count`` exact terms a(p^m)^2 p^(-m) of the C0 local series,
    built from the odd-double-factorial form of the half-order coefficients."""
    out = []
    for m in range(count):
        a = double_factorial_coeff(m)
        out.append(a * a * Fraction(1, p**m))
    return out


def ck_local_series_terms(k: FractionalOrder, p: int, count: int) -> list[Fraction]:
    """First ``count`` exact terms of the Conrey-Ghosh local series at order k,
    built from the Pochhammer form of the coefficients."""
    out = []
    for m in range(count):
        a = prime_power_coeff(k, m)
        out.append(a * a * Fraction(1, p**m))
    return out


def _product_over_primes(
    spec: EulerProductSpec,
    s: mpf,
    order: FractionalOrder,
    exponent: Fraction,
) -> ProductValue:
    """prod_{p <= P} (1 - p^(-s))^exponent * [sum_m d_k(p^m)^2 p^(-ms)]."""
    ctx = spec.precision
    P = spec.prime_cutoff
    with mp.workprec(ctx.workprec):
        primes = _primes(P)
        exp_mpf = mpf(exponent.numerator) / mpf(exponent.denominator)
        a2 = _squared_coeffs(order, ctx.workprec, _DEPTH_CAP)
        log_total = mpf(0)
        depths = []
        for p in primes:
            M = spec.factor_depth or _auto_depth(p, s, ctx.workprec)
            depths.append(M)
            x = mpmath.exp(-s * mpmath.log(p))
            acc = a2[M]
            for m in range(M - 1, -1, -1):
                acc = acc * x + a2[m]
            log_total += mpmath.log(acc) + exp_mpf * mpmath.log1p(-x)
        value = mpmath.exp(log_total)
        tail = _tail_log_bound(P, s, order)
        tail += _depth_log_slack(primes, s, depths, ctx.workprec)
        tail += (len(primes) + 8) * mpf(2) ** (-(ctx.workprec - 4))
        return ProductValue(
            value=+value,
            prime_cutoff=P,
            tail_bound=+tail,
            precision_bits=ctx.bits,
        )


def C0(spec: EulerProductSpec) -> ProductValue:
    """The first-moment constant: prod_p (1-1/p)^(1/4) [1 + a(p)^2/p + ...].

    The local series uses the odd-double-factorial coefficients so that this
    route stays independent of the Pochhammer-based hk_ratio route.
    """
    ctx = spec.precision
    P = spec.prime_cutoff
    with mp.workprec(ctx.workprec):
        primes = _primes(P)
        quarter = mpf(1) / 4
        # exact squared series coefficients from the double-factorial form
        depth_cap_terms = []
        for m in range(_DEPTH_CAP + 1):
            a = double_factorial_coeff(m)
            depth_cap_terms.append(
                mpf(a.numerator * a.numerator) / mpf(a.denominator * a.denominator)
            )
        one = mpf(1)
        log_total = mpf(0)
        depths = []
        for p in primes:
            M = spec.factor_depth or _auto_depth(p, one, ctx.workprec)
            depths.append(M)
            x = 1 / mpf(p)
            acc = depth_cap_terms[M]
            for m in range(M - 1, -1, -1):
                acc = acc * x + depth_cap_terms[m]
            log_total += mpmath.log(acc) + quarter * mpmath.log1p(-x)
        value = mpmath.exp(log_total)
        tail = _tail_log_bound(P, one, HALF)
        tail += _depth_log_slack(primes, one, depths, ctx.workprec)
        tail += (len(primes) + 8) * mpf(2) ** (-(ctx.workprec - 4))
        return ProductValue(
            value=+value,
            prime_cutoff=P,
            tail_bound=+tail,
            precision_bits=ctx.bits,
        )


def conrey_ghosh_ck(k: FractionalOrder, spec: EulerProductSpec) -> ProductValue:
    """The conjectured 2k-th moment constant
    c_k = Gamma(k^2+1)^(-1) prod_p (1-1/p)^(k^2) sum_m d_k(p^m)^2 p^(-m)."""
    if k.k > 1:
        raise DomainError("desk-scale tail bounds cover 0 < k <= 1 only")
    ctx = spec.precision
    q = k.k * k.k
    base = _product_over_primes(spec, mpf(1), k, q)
    with mp.workprec(ctx.workprec):
        q_mpf = mpf(q.numerator) / mpf(q.denominator)
        g = gamma(q_mpf + 1, ctx)
        value = base.value / g.real
        return ProductValue(
            value=+value,
            prime_cutoff=base.prime_cutoff,
            tail_bound=base.tail_bound + mpf(2) ** (-(ctx.workprec - 8)),
            precision_bits=ctx.bits,
        )


def hk_ratio(
    s: Union[mpf, float, Fraction],
    spec: EulerProductSpec,
) -> ProductValue:
    """h(s)/k(s) = prod_p [local g factor] (1 - p^(-s))^(1/4) for s > 1/2.

    Equals C0 at s = 1 and g(s) zeta(s)^(-1/4) elsewhere on the real axis."""
    s = mpf(s)
    if s <= mpf(1) / 2:
        raise ConvergenceError(f"h/k product needs s > 1/2, got {s}")
    return _product_over_primes(spec, s, HALF, Fraction(1, 4))


def g_series(
    s: Union[mpf, float, Fraction],
    N: int,
    table: Optional[CoefficientTable] = None,
    ctx: PrecisionContext = DEFAULT_CTX,
) -> ProductValue:
    """Direct series sum_{n<=N} a(n)^2 n^(-s) with the integral tail bound.

    Needs s > 1 for absolute convergence; the tail bound is
    sum_{n>N} n^(-s) <= N^(1-s)/(s-1) since a(n)^2 <= 1.
    """
    s = mpf(s)
    if s <= 1:
        raise ConvergenceError(f"series needs s > 1, got {s}")
    if N < 1:
        raise DomainError(f"series cutoff must be >= 1, got {N}")
    if table is None:
        table = sieve_coeffs(HALF, N)
    if table.limit < N:
        raise DomainError(f"table limit {table.limit} below N = {N}")
    values = table.values
    with mp.workprec(ctx.workprec):
        total = mpf(0)
        s_int = int(s) if s == int(s) else None
        two_s = 2 * s
        half_int = int(two_s) if (s_int is None and two_s == int(two_s)) else None
        for n in range(1, N + 1):
            a = values[n]
            num = a.numerator * a.numerator
            den = a.denominator * a.denominator
            if s_int is not None:
                total += mpf(num) / mpf(den * n**s_int)
            elif half_int is not None:
                total += mpf(num) / (mpf(den * n ** (half_int // 2)) * mpmath.sqrt(n))
            else:
                total += mpf(num) / mpf(den) * mpmath.exp(-s * mpmath.log(n))
        # log-space tail bound for uniformity with the product routes:
        # dropped/value <= dropped since value >= 1
        dropped = mpf(N) ** (1 - s) / (s - 1)
        rounding = (N + 8) * mpf(2) ** (-(ctx.workprec - 4))
        return ProductValue(
            value=+total,
            prime_cutoff=N,
            tail_bound=+(dropped + rounding),
            precision_bits=ctx.bits,
        )
