"""Arbitrary-precision evaluation of zeta, gamma, chi, Z(t) and theta(t).

Two independent zeta routes are provided: an Euler-Maclaurin evaluator with
a rigorous remainder bound (valid anywhere except s = 1, slow at large |t|)
and a Riemann-Siegel evaluator for the critical line (fast, with the
classical asymptotic error bound).  theta(t) is computed from its own
Stirling expansion rather than through the gamma routine so that the
"Z(t) is real" test does not validate gamma against itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import mpmath
from mpmath import mp, mpc, mpf
from mpmath.libmp import mpf_add, mpf_cos, mpf_mul, mpf_sub

from .errors import (
    DomainError,
    PoleError,
    PrecisionError,
    SingularityError,
)

GUARD_BITS = 24

# Riemann-Siegel remainder after K correction terms is below C_RS[K] * t^-(2K+3)/4
# for t >= 200 (Gabcke's bounds).  Below t = 200 the same shape holds with an
# extra factor, measured against Euler-Maclaurin on [10, 200] and frozen with
# more than 2x margin.
C_RS = (mpf("0.127"), mpf("0.053"), mpf("0.011"), mpf("0.031"), mpf("0.017"))
RS_LOW_T_SAFETY = 3
RS_T_MIN = 10


class Method(enum.Enum):
    EULER_MACLAURIN = "em"
    RIEMANN_SIEGEL = "rs"


@dataclass(frozen=True)
class PrecisionContext:
    """Working binary precision plus the absolute error target shared by the
    numeric operations."""

    bits: int = 192
    target_abs_error: Optional[mpf] = None

    def __post_init__(self) -> None:
        if self.bits < 64:
            raise DomainError(f"precision must be >= 64 bits, got {self.bits}")
        if self.target_abs_error is None:
            object.__setattr__(
                self, "target_abs_error", mpf(2) ** (-(self.bits - 12))
            )
        else:
            object.__setattr__(self, "target_abs_error", mpf(self.target_abs_error))
        if self.target_abs_error <= 0:
            raise DomainError("target_abs_error must be positive")

    @property
    def workprec(self) -> int:
        return self.bits + GUARD_BITS


DEFAULT_CTX = PrecisionContext()


@dataclass(frozen=True)
class ZetaSample:
    """One point evaluation of zeta with its method and error bound."""

    s: mpc
    value: mpc
    method: Method
    abs_error_bound: mpf

    def __post_init__(self) -> None:
        if self.abs_error_bound < 0:
            raise DomainError("error bound must be nonnegative")
        if self.method is Method.RIEMANN_SIEGEL and self.s.real != mpf(1) / 2:
            raise DomainError("Riemann-Siegel samples live on the critical line")


# ---------------------------------------------------------------------------
# Euler-Maclaurin zeta
# ---------------------------------------------------------------------------

_EM_MAX_BERNOULLI = 96
_EM_MAX_TERMS = 2_000_000
_LOG_CACHE: dict[int, list] = {}
_RSQRT_CACHE: dict[int, list] = {}
_POW_CACHE: dict[tuple, list] = {}


def _log_table(n: int) -> list:
    """ln 1 .. ln n at current working precision, cached per precision."""
    prec = mp.prec
    table = _LOG_CACHE.get(prec)
    if table is None:
        table = [mpf(0), mpf(0)]
        _LOG_CACHE[prec] = table
    while len(table) <= n:
        table.append(mpmath.log(len(table)))
    return table


def _rsqrt_table(n: int) -> list:
    """1/sqrt(1) .. 1/sqrt(n) at current working precision."""
    prec = mp.prec
    table = _RSQRT_CACHE.get(prec)
    if table is None:
        table = [mpf(0), mpf(1)]
        _RSQRT_CACHE[prec] = table
    while len(table) <= n:
        table.append(1 / mpmath.sqrt(len(table)))
    return table


def _real_power_table(sigma: mpf, n: int) -> list:
    """n^(-sigma) for 1 <= n at current working precision, cached per (sigma, prec).

    The moment quadrature evaluates zeta at thousands of points with the same
    real part, so these factors are worth keeping."""
    key = (mp.prec, sigma._mpf_)
    table = _POW_CACHE.get(key)
    if table is None:
        table = [mpf(0), mpf(1)]
        _POW_CACHE[key] = table
    logs = _log_table(n)
    while len(table) <= n:
        table.append(mpmath.exp(-sigma * logs[len(table)]))
    return table


def zeta_em(s: Union[complex, mpc, mpf, float], ctx: PrecisionContext = DEFAULT_CTX) -> ZetaSample:
    """zeta(s) by Euler-Maclaurin summation with a rigorous remainder bound.

    Valid for every s != 1.  The number of direct terms starts at
    max(10, 1.2|s|) and the Bernoulli correction depth is raised until the
    classical remainder bound drops below ctx.target_abs_error.
    """
    s = mpc(s)
    if s == 1:
        raise PoleError("zeta has its pole at s = 1")
    target = ctx.target_abs_error
    # Working precision must leave the rounding noise of ~N+m accumulated terms
    # below the target; raise it if the caller asked for more than the bits give.
    extra = max(0, int(-mpmath.log(target, 2)) + GUARD_BITS - ctx.bits)
    with mp.workprec(ctx.workprec + extra):
        n_terms = max(10, int(mpf("1.2") * abs(s)) + 1)
        while True:
            value, bound, depth = _zeta_em_once(s, n_terms, target)
            if bound is not None:
                rounding = (n_terms + depth + 8) * (abs(value) + 1) * mpf(2) ** (
                    -(mp.prec - 2)
                )
                total_bound = bound + rounding
                if total_bound <= target:
                    return ZetaSample(
                        s=s,
                        value=+value,
                        method=Method.EULER_MACLAURIN,
                        abs_error_bound=+total_bound,
                    )
            n_terms *= 2
            if n_terms > _EM_MAX_TERMS:
                raise PrecisionError(
                    f"Euler-Maclaurin could not reach {target} at s={s}"
                )


def _zeta_em_once(s: mpc, n_terms: int, target: mpf):
    """One Euler-Maclaurin pass with N = n_terms direct terms.

    Returns (value, remainder_bound_or_None, bernoulli_depth).
    """
    logs = _log_table(n_terms)
    sigma = s.real
    t_part = s.imag
    total = mpc(1)
    if t_part == 0:
        powers = _real_power_table(sigma, n_terms - 1)
        for n in range(2, n_terms):
            total += powers[n]
    else:
        powers = _real_power_table(sigma, n_terms - 1)
        expj = mpmath.expj
        for n in range(2, n_terms):
            total += powers[n] * expj(-t_part * logs[n])
    log_n = mpmath.log(n_terms)
    total += mpmath.exp((1 - s) * log_n) / (s - 1)
    total += mpmath.exp(-s * log_n) / 2

    nn = mpf(n_terms)
    poch = s  # (s)_{2k-1}
    npow = mpmath.exp(-(s + 1) * log_n)  # N^{-s-2k+1}
    inv_n2 = 1 / (nn * nn)
    bound = None
    depth = 0
    for k in range(1, _EM_MAX_BERNOULLI + 1):
        term = (
            mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * poch * npow
        )
        total += term
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)  # -> (s)_{2k+1}
        npow = npow * inv_n2  # -> N^{-s-2k-1}
        depth = k
        denom = sigma + 2 * k + 1
        if denom <= 0:
            continue
        remainder = (
            abs(mpmath.bernoulli(2 * k + 2))
            / mpmath.factorial(2 * k + 2)
            * abs(poch)
            * abs(npow)
            * abs(s + 2 * k + 1)
            / denom
        )
        if remainder < target / 2:
            bound = remainder
            break
        if k > 6 and abs(term) > 1:
            break  # asymptotic tail started growing; need larger N
    return total, bound, depth


# ---------------------------------------------------------------------------
# Riemann-Siegel theta by its own Stirling expansion
# ---------------------------------------------------------------------------

_THETA_MAX_BERNOULLI = 64


def theta(t: Union[mpf, float], ctx: PrecisionContext = DEFAULT_CTX) -> mpf:
    """Riemann-Siegel theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log pi.

    Stirling expansion with the classical remainder bound; the argument is
    shifted up by the recurrence until the expansion point is far enough out
    that the bound can meet ctx.target_abs_error.  Independent of gamma().
    """
    value, bound = theta_with_bound(t, ctx)
    return value


def theta_with_bound(t, ctx: PrecisionContext = DEFAULT_CTX) -> tuple[mpf, mpf]:
    t = mpf(t)
    target = ctx.target_abs_error
    extra = max(0, int(-mpmath.log(target, 2)) + GUARD_BITS - ctx.bits)
    with mp.workprec(ctx.workprec + extra):
        # |z + shift| >= radius makes the capped expansion reach the target.
        bits_goal = int(-mpmath.log(target, 2)) + 8
        radius = mpf("0.18") * bits_goal + 10
        y = t / 2
        shift = 0
        if mpf(1) / 16 + y * y < radius * radius:
            shift = int(mpmath.ceil(mpmath.sqrt(radius**2 - y * y))) + 1
        x = mpf(1) / 4 + shift
        # z = x + iy in polar form; only the imaginary part of log Gamma is kept.
        r2 = x * x + y * y
        log_r = mpmath.log(r2) / 2
        phi = mpmath.atan2(y, x)
        total = (x - mpf(1) / 2) * phi + y * log_r - y
        # Im sum_m B_2m / (2m(2m-1) z^(2m-1)) via sin((2m-1)phi) recurrences
        inv_r2 = 1 / r2
        r = mpmath.sqrt(r2)
        rpow = r * r2  # r^(2m+1) at m = 1
        inv_rpow = 1 / r  # r^-(2m-1) at m = 1
        sin_phi = y / r
        cos_phi = x / r
        sin_2 = 2 * sin_phi * cos_phi
        cos_2 = cos_phi * cos_phi - sin_phi * sin_phi
        sin_k = sin_phi  # sin((2m-1) phi)
        cos_k = cos_phi
        bound = None
        two_pow = mpf(4)  # 2^(m+1) at m = 1
        for m in range(1, _THETA_MAX_BERNOULLI + 1):
            coeff = mpmath.bernoulli(2 * m) / ((2 * m) * (2 * m - 1))
            total -= coeff * inv_rpow * sin_k
            remainder = (
                abs(mpmath.bernoulli(2 * m + 2))
                / ((2 * m + 1) * (2 * m + 2) * rpow)
                * two_pow
            )
            if remainder < target / 2:
                bound = remainder
                break
            sin_k, cos_k = (
                sin_k * cos_2 + cos_k * sin_2,
                cos_k * cos_2 - sin_k * sin_2,
            )
            inv_rpow *= inv_r2
            rpow *= r2
            two_pow *= 2
        if bound is None:
            raise PrecisionError(f"theta expansion could not reach {target} at t={t}")
        for k in range(shift):
            total -= mpmath.atan2(y, mpf(1) / 4 + k)
        value = total - y * mpmath.log(mpmath.pi)
        rounding = (shift + 24) * (abs(value) + 1) * mpf(2) ** (-(mp.prec - 2))
        return +value, +(bound + rounding)


# ---------------------------------------------------------------------------
# Riemann-Siegel Z(t)
# ---------------------------------------------------------------------------

# Taylor model of the entire function
#   Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p)
# about p = 1/2, from which every correction term C_0..C_4 is a linear
# combination of derivatives.  Computed once at a fixed master precision so
# all processes see identical coefficients.
_PSI_MASTER_PREC = 420
_PSI_MASTER_TERMS = 160
# The correction sum never needs more accuracy than the formula's own
# truncation floor (~1e-12 at t = 5000), so its evaluation precision is
# capped; the cap is charged to the reported error bound.
_CORR_PREC_CAP = 112
_psi_master: Optional[list] = None
_correction_cache: dict[int, list] = {}

# C_k as sums coeff * Psi^(d); (coefficient fraction, power of pi, derivative)
_C_RECIPES = (
    ((1, 0, 0),),
    ((-mpf(1) / 96, 2, 3),),
    ((mpf(1) / 64, 2, 2), (mpf(1) / 18432, 4, 6)),
    (
        (-mpf(1) / 64, 2, 1),
        (-mpf(1) / 3840, 4, 5),
        (-mpf(1) / 5308416, 6, 9),
    ),
    (
        (mpf(1) / 128, 2, 0),
        (mpf(19) / 24576, 4, 4),
        (mpf(11) / 5898240, 6, 8),
        (mpf(1) / 2038431744, 8, 12),
    ),
)


def _psi_taylor_master() -> list:
    """Taylor coefficients of Psi about p = 1/2 (variable w = p - 1/2)."""
    global _psi_master
    if _psi_master is not None:
        return _psi_master
    n = _PSI_MASTER_TERMS
    with mp.workprec(_PSI_MASTER_PREC):
        twopi = 2 * mpmath.pi
        num = [mpf(0)] * n
        c58 = mpmath.cos(5 * mpmath.pi / 8)
        s58 = mpmath.sin(5 * mpmath.pi / 8)
        j = 0
        while 4 * j < n:
            num[4 * j] += c58 * (-1) ** j * twopi ** (2 * j) / mpmath.factorial(2 * j)
            j += 1
        j = 0
        while 4 * j + 2 < n:
            num[4 * j + 2] += (
                s58 * (-1) ** j * twopi ** (2 * j + 1) / mpmath.factorial(2 * j + 1)
            )
            j += 1
        den = [mpf(0)] * n
        j = 0
        while 2 * j < n:
            den[2 * j] = -((-1) ** j * twopi ** (2 * j) / mpmath.factorial(2 * j))
            j += 1
        quot = [mpf(0)] * n
        for i in range(n):
            acc = num[i]
            for j in range(i):
                acc -= quot[j] * den[i - j]
            quot[i] = acc / den[0]
    _psi_master = quot
    return quot


def _correction_polys(prec: int) -> list:
    """Coefficient arrays of C_0..C_4 in w = p - 1/2, truncated for ``prec``."""
    polys = _correction_cache.get(prec)
    if polys is not None:
        return polys
    psi = _psi_taylor_master()
    n = len(psi)
    with mp.workprec(_PSI_MASTER_PREC):
        polys = []
        for recipe in _C_RECIPES:
            coeffs = [mpf(0)] * n
            for frac, pi_pow, deriv in recipe:
                scale = mpf(frac) / mpmath.pi**pi_pow
                for i in range(deriv, n):
                    fall = mpf(1)
                    for q in range(i, i - deriv, -1):
                        fall *= q
                    coeffs[i - deriv] += scale * psi[i] * fall
            polys.append(coeffs)
    # Truncate where the remaining contribution on |w| <= 1/2 is negligible.
    floor = mpf(2) ** (-(prec + 16))
    with mp.workprec(prec + 8):
        out = []
        for coeffs in polys:
            cut = len(coeffs)
            while cut > 1 and abs(coeffs[cut - 1]) * mpf(2) ** (-(cut - 1)) < floor:
                cut -= 1
            out.append([+c for c in coeffs[:cut]])
    _correction_cache[prec] = out
    return out


def _rs_error_bound(t: mpf, terms: int) -> mpf:
    bound = C_RS[terms] * t ** (-(2 * terms + 3) / mpf(4))
    if t < 200:
        bound *= RS_LOW_T_SAFETY
    return bound


def z_function(
    t: Union[mpf, float],
    ctx: PrecisionContext = DEFAULT_CTX,
    terms: int = 4,
) -> tuple[mpf, mpf]:
    """Riemann-Siegel Z(t) with its absolute error bound.

    Z(t) = 2 sum_{n<=N} cos(theta(t) - t log n)/sqrt(n)
           + (-1)^(N-1) tau^(-1/4) sum_{k<=terms} C_k(p) tau^(-k/2),
    tau = t/(2 pi), N = floor(sqrt(tau)), p = sqrt(tau) - N.
    """
    t = mpf(t)
    if t < RS_T_MIN:
        raise DomainError(
            f"Riemann-Siegel needs t >= {RS_T_MIN}; fall back to zeta_em below"
        )
    if not 0 <= terms <= 4:
        raise DomainError(f"terms must be in [0, 4], got {terms}")
    with mp.workprec(ctx.workprec):
        th, th_bound = theta_with_bound(t, ctx)
        tau = t / (2 * mpmath.pi)
        a = mpmath.sqrt(tau)
        n_main = int(a)
        p = a - n_main
        logs = _log_table(n_main)
        rsqrt = _rsqrt_table(n_main)
        # main sum in raw libmp ops; this loop and the Horner loops below are
        # the quadrature hot path
        prec = mp.prec
        rnd = "n"
        th_raw = th._mpf_
        t_raw = t._mpf_
        acc_raw = mpf(0)._mpf_
        for n in range(1, n_main + 1):
            phase = mpf_sub(th_raw, mpf_mul(t_raw, logs[n]._mpf_, prec, rnd), prec, rnd)
            acc_raw = mpf_add(
                acc_raw, mpf_mul(mpf_cos(phase, prec, rnd), rsqrt[n]._mpf_, prec, rnd), prec, rnd
            )
        total = 2 * mp.make_mpf(acc_raw)
        corr_prec = min(mp.prec, _CORR_PREC_CAP)
        with mp.workprec(corr_prec):
            polys = _correction_polys(corr_prec)
            w = p - mpf(1) / 2
            tau_m14 = tau ** (-mpf(1) / 4)
            tau_m12 = 1 / a
            corr = mpf(0)
            scale = tau_m14 if n_main % 2 == 1 else -tau_m14
            cp = corr_prec
            w_raw = (+w)._mpf_
            for k in range(terms + 1):
                coeffs = polys[k]
                acc = coeffs[-1]._mpf_
                for c in reversed(coeffs[:-1]):
                    acc = mpf_add(mpf_mul(acc, w_raw, cp, rnd), c._mpf_, cp, rnd)
                corr += scale * mp.make_mpf(acc)
                scale *= tau_m12
        total += corr
        truncation = _rs_error_bound(t, terms)
        # theta error feeds the main sum through cos', |d/dtheta| <= 2 sum n^-1/2
        theta_feed = th_bound * 2 * (n_main + 1)
        rounding = (n_main + 40) * (abs(total) + 1) * mpf(2) ** (-(mp.prec - 2))
        corr_floor = mpf(2) ** (-(corr_prec - 6))
        return +total, +(truncation + theta_feed + rounding + corr_floor)


def zeta_rs(
    t: Union[mpf, float],
    terms: int = 4,
    ctx: PrecisionContext = DEFAULT_CTX,
) -> ZetaSample:
    """zeta(1/2 + it) from the Riemann-Siegel Z value: zeta = exp(-i theta) Z."""
    t = mpf(t)
    with mp.workprec(ctx.workprec):
        z, bound = z_function(t, ctx, terms=terms)
        th = theta(t, ctx)
        value = mpmath.exp(mpc(0, -th)) * z
        s = mpc(mpf(1) / 2, t)
    return ZetaSample(s=s, value=+value, method=Method.RIEMANN_SIEGEL, abs_error_bound=+bound)


# ---------------------------------------------------------------------------
# gamma and the functional-equation factor chi
# ---------------------------------------------------------------------------


def _is_excluded_chi_point(s: mpc) -> bool:
    if s.imag != 0:
        return False
    x = s.real
    if x != mpmath.floor(x):
        return False
    n = int(x)
    return (n > 0 and n % 2 == 1) or (n <= 0 and n % 2 == 0)


def gamma(s: Union[complex, mpc, mpf, float], ctx: PrecisionContext = DEFAULT_CTX) -> mpc:
    """Gamma(s) with absolute error below ctx.target_abs_error."""
    s = mpc(s)
    if s.imag == 0 and s.real == mpmath.floor(s.real) and s.real <= 0:
        raise PoleError(f"gamma pole at s = {s}")
    target = ctx.target_abs_error
    prec = ctx.workprec
    while True:
        with mp.workprec(prec):
            value = mpmath.gamma(s)
            slack = (abs(value) + 1) * mpf(2) ** (-(mp.prec - 6))
            if slack <= target or prec > 64 * ctx.workprec:
                return +value
        prec *= 2


def log_gamma(s: Union[complex, mpc, mpf, float], ctx: PrecisionContext = DEFAULT_CTX) -> mpc:
    """Principal branch of log Gamma (continuous from the positive real axis)."""
    s = mpc(s)
    if s.imag == 0 and s.real == mpmath.floor(s.real) and s.real <= 0:
        raise PoleError(f"log-gamma singular at s = {s}")
    with mp.workprec(ctx.workprec):
        return +mpmath.loggamma(s)


def chi(s: Union[complex, mpc, mpf, float], ctx: PrecisionContext = DEFAULT_CTX) -> mpc:
    """chi(s) = (2^(1-s) pi^(-s) cos(pi s/2) Gamma(s))^(-1).

    zeta(1-s) = chi(s)^(-1) zeta(s); |chi| = 1 on the critical line.  At the
    negative odd integers the displayed form is a removable 0 * inf, so the
    algebraically identical 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) is used there.
    """
    s = mpc(s)
    if _is_excluded_chi_point(s):
        raise SingularityError(f"chi undefined at s = {s}")
    with mp.workprec(ctx.workprec + 16):
        log2 = mpmath.log(2)
        logpi = mpmath.log(mpmath.pi)
        if s.imag == 0 and s.real == mpmath.floor(s.real) and s.real < 0:
            value = (
                mpmath.exp(s * log2 + (s - 1) * logpi)
                * mpmath.sin(mpmath.pi * s / 2)
                * mpmath.gamma(1 - s)
            )
            return +value
        factor = (
            mpmath.exp((1 - s) * log2 - s * logpi)
            * mpmath.cos(mpmath.pi * s / 2)
            * mpmath.gamma(s)
        )
        return +(1 / factor)


# ---------------------------------------------------------------------------
# Lemma-style checks
# ---------------------------------------------------------------------------


def gamma_quarter_stirling_check(
    t_values: Sequence,
    ctx: PrecisionContext = DEFAULT_CTX,
    sigma: Union[mpf, float] = mpf(1) / 2,
) -> list[tuple[mpf, mpf, mpf]]:
    """Compare Gamma(s)^(1/4) against 2^(-5/8) pi^(-3/8) 2^(s/2) Gamma((s+1.5)/4).

    Returns (t, relative_error, relative_error * |s|) per sample; the fourth
    root is exp(log Gamma / 4) on the branch continued from the positive real
    axis.
    """
    out = []
    sigma = mpf(sigma)
    if not 0 <= sigma <= 1:
        raise DomainError("the factorization is stated for 0 <= sigma <= 1")
    with mp.workprec(ctx.workprec + 16):
        front = mpf(2) ** (mpf(-5) / 8) * mpmath.pi ** (mpf(-3) / 8)
        log2 = mpmath.log(2)
        for t in t_values:
            t = mpf(t)
            if t == 0:
                raise DomainError("the factorization needs |t| > 0")
            s = mpc(sigma, t)
            lhs = mpmath.exp(mpmath.loggamma(s) / 4)
            rhs = front * mpmath.exp(s / 2 * log2) * mpmath.gamma((s + mpf(3) / 2) / 4)
            rel = abs(lhs - rhs) / abs(lhs)
            out.append((+t, +rel, +(rel * abs(s))))
    return out


def convexity_bound_check(
    samples: Sequence,
    ctx: PrecisionContext = DEFAULT_CTX,
) -> mpf:
    """max over samples of |zeta(s)| / ((2+|t|)^((1-sigma)/3) log(2+|t|)).

    The returned constant witnesses the convexity-type bound on the strip
    1/2 <= sigma <= 1; it is asserted finite, nothing more.
    """
    best = mpf(0)
    with mp.workprec(ctx.workprec):
        for s in samples:
            s = mpc(s)
            sigma, t = s.real, abs(s.imag)
            if not mpf(1) / 2 <= sigma <= 1:
                raise DomainError(f"sample {s} outside the strip [1/2, 1]")
            if t > 10**4:
                raise DomainError("samples are desk-scale: t <= 10^4")
            value = abs(zeta_em(s, ctx).value)
            envelope = (2 + t) ** ((1 - sigma) / 3) * mpmath.log(2 + t)
            ratio = value / envelope
            if not mpmath.isfinite(ratio):
                raise PrecisionError(f"ratio not finite at s = {s}")
            if ratio > best:
                best = ratio
        return +best
