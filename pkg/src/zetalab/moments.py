"""Moment integrals of |zeta| on the critical line and nearby.

The integrand |Z(t)| is only continuous at the zeros of Z, so quadrature
panels never straddle a located zero: zeros are found first (coarse scan
plus safeguarded bisection), then each inter-zero panel is handled by an
adaptive Gauss-Legendre rule.  Panels are independent work items; when a
worker pool is used the reduction order is fixed ascending, so results are
bitwise identical for any --jobs value.
"""

from __future__ import annotations

import enum
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import mp, mpf

from . import products
from .coeffs import HALF, CoefficientTable, sieve_coeffs, square_prefix_sums
from .errors import (
    DegenerateFitError,
    DomainError,
    GridResolutionWarning,
    ResourceLimitError,
)
from .products import EulerProductSpec
from .zeta import DEFAULT_CTX, PrecisionContext, gamma, z_function, zeta_em

RS_TERMS_DEFAULT = 4
GRID_STEP = mpf("0.05")
BISECT_TOL = mpf("1e-12")
HEAD_T = 10  # below this the Riemann-Siegel floor applies; head uses Euler-Maclaurin
HEAD_STEP_NUM = 100  # head Simpson grid: 1/100
QUAD_TOL_PER_UNIT = mpf("1e-9")
LAPLACE_TRUNC = 50  # T* = LAPLACE_TRUNC / delta
LAPLACE_TMAX_BUDGET = mpf("50000")  # documented delta floor: 1e-3
LEMMA4_TRUNC = 46  # pi N^4 sin(4 delta) > 46 drops the tail below e^-46
_GL_RULE_LO = 12
_GL_RULE_HI = 18
_MAX_SPLIT_DEPTH = 30


class MomentKind(enum.Enum):
    FIRST_SHARP = "FirstSharp"
    FIRST_LAPLACE = "FirstLaplace"
    SECOND_SHARP = "SecondSharp"
    FRACTIONAL_OFFLINE = "FractionalOffLine"
    LEMMA4_SUM = "Lemma4Sum"


@dataclass(frozen=True)
class MomentEstimate:
    """A computed moment with its quadrature error estimate and the model
    values it is to be compared against."""

    parameter: mpf
    kind: MomentKind
    value: mpf
    quadrature_error: mpf
    model_predictions: dict
    notes: str = ""

    def __post_init__(self) -> None:
        if self.value < 0:
            raise DomainError("moment integrands are nonnegative")
        if self.quadrature_error < 0:
            raise DomainError("quadrature error must be nonnegative")


@dataclass(frozen=True)
class ZeroList:
    """Ascending ordinates of sign changes of Z(t) on a range."""

    ordinates: tuple
    range: tuple

    def __post_init__(self) -> None:
        for a, b in zip(self.ordinates, self.ordinates[1:]):
            if not a < b:
                raise DomainError("ordinates must be strictly ascending")

    def __len__(self) -> int:
        return len(self.ordinates)


@dataclass(frozen=True)
class FitResult:
    """Least-squares constant for value ~ C * T * log^(1/4) T."""

    c_hat: mpf
    residuals: tuple
    point_ratios: tuple
    reference_paper: Optional[mpf] = None  # sqrt(2) C0 / Gamma(5/4)
    reference_cg: Optional[mpf] = None  # C0 / Gamma(5/4)


# ---------------------------------------------------------------------------
# Gauss-Legendre panels
# ---------------------------------------------------------------------------

_GL_CACHE: dict = {}


def _gauss_legendre(n: int) -> tuple:
    """Nodes and weights on [-1, 1] at the current working precision."""
    key = (n, mp.prec)
    cached = _GL_CACHE.get(key)
    if cached is not None:
        return cached
    nodes = []
    weights = []
    tol = mpf(2) ** (-(mp.prec - 8))
    for i in range(n):
        x = mpmath.cos(mpmath.pi * (i + mpf(3) / 4) / (n + mpf(1) / 2))
        for _ in range(60):
            p0, p1 = mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < tol:
                break
        p0, p1 = mpf(1), x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    out = (tuple(nodes), tuple(weights))
    _GL_CACHE[key] = out
    return out


def _gl_integrate(f: Callable, a: mpf, b: mpf, n: int) -> mpf:
    nodes, weights = _gauss_legendre(n)
    mid = (a + b) / 2
    half = (b - a) / 2
    acc = mpf(0)
    for x, w in zip(nodes, weights):
        acc += w * f(mid + half * x)
    return acc * half


def _adaptive_panel(f: Callable, a: mpf, b: mpf, tol: mpf, depth: int = 0) -> tuple:
    coarse = _gl_integrate(f, a, b, _GL_RULE_LO)
    fine = _gl_integrate(f, a, b, _GL_RULE_HI)
    err = abs(fine - coarse)
    if err <= tol or depth >= _MAX_SPLIT_DEPTH:
        return fine, err
    m = (a + b) / 2
    v1, e1 = _adaptive_panel(f, a, m, tol / 2, depth + 1)
    v2, e2 = _adaptive_panel(f, m, b, tol / 2, depth + 1)
    return v1 + v2, e1 + e2


def _simpson_fixed(f: Callable, a: mpf, b: mpf, max_step: mpf) -> mpf:
    """Composite Simpson with an even interval count and step <= max_step."""
    if b <= a:
        return mpf(0)
    n = 2 * int(mpmath.ceil((b - a) / (2 * max_step)))
    n = max(n, 2)
    h = (b - a) / n
    acc = f(a) + f(b)
    for i in range(1, n):
        acc += f(a + i * h) * (4 if i % 2 else 2)
    return acc * h / 3


# ---------------------------------------------------------------------------
# Integrand plumbing (wire-format specs so panels can cross process borders)
# ---------------------------------------------------------------------------


def _to_wire(x: mpf) -> tuple:
    sign, man, exp, bc = mpf(x)._mpf_
    return (sign, int(man), exp, bc)


def _from_wire(w: tuple):
    sign, man, exp, bc = w
    return mp.make_mpf((sign, mpmath.libmp.MPZ(man), exp, bc))


def _build_integrand(spec: tuple) -> tuple:
    """(callable, PrecisionContext) from a picklable spec tuple."""
    kind = spec[0]
    if kind == "abs_z":
        _, bits, terms = spec
        ctx = PrecisionContext(bits=bits)

        def f(t, _ctx=ctx, _terms=terms):
            return abs(z_function(t, _ctx, terms=_terms)[0])

        return f, ctx
    if kind == "z_sq":
        _, bits, terms = spec
        ctx = PrecisionContext(bits=bits)

        def f(t, _ctx=ctx, _terms=terms):
            z = z_function(t, _ctx, terms=_terms)[0]
            return z * z

        return f, ctx
    if kind == "abs_z_exp":
        _, bits, terms, delta_wire = spec
        ctx = PrecisionContext(bits=bits)
        delta = _from_wire(delta_wire)

        def f(t, _ctx=ctx, _terms=terms, _d=delta):
            return abs(z_function(t, _ctx, terms=_terms)[0]) * mpmath.exp(-_d * t)

        return f, ctx
    if kind == "abs_em":
        _, bits, sigma_wire = spec
        ctx = PrecisionContext(bits=bits)
        sigma = _from_wire(sigma_wire)

        def f(t, _ctx=ctx, _sig=sigma):
            return abs(zeta_em(mpmath.mpc(_sig, t), _ctx).value)

        return f, ctx
    raise DomainError(f"unknown integrand spec {spec!r}")


def _panel_worker(args: tuple) -> list:
    """Evaluate a chunk of adaptive panels; used serially and in the pool."""
    spec, tol_per_unit_wire, chunk = args
    f, ctx = _build_integrand(spec)
    tol_per_unit = _from_wire(tol_per_unit_wire)
    out = []
    with mp.workprec(ctx.workprec):
        for idx, a_wire, b_wire in chunk:
            a = _from_wire(a_wire)
            b = _from_wire(b_wire)
            value, err = _adaptive_panel(f, a, b, tol_per_unit * (b - a))
            out.append((idx, _to_wire(value), _to_wire(err)))
    return out


def _run_panels(
    spec: tuple,
    edges: Sequence,
    jobs: int,
    tol_per_unit: mpf = QUAD_TOL_PER_UNIT,
) -> tuple:
    """Integrate over consecutive [edges[i], edges[i+1]] panels.

    Returns (per-panel values, per-panel error estimates), reduced in
    ascending order whatever the worker layout was.
    """
    items = [
        (i, _to_wire(edges[i]), _to_wire(edges[i + 1]))
        for i in range(len(edges) - 1)
    ]
    if not items:
        return (), ()
    tol_wire = _to_wire(tol_per_unit)
    if jobs <= 1 or len(items) < 4:
        results = _panel_worker((spec, tol_wire, items))
    else:
        chunk_size = max(1, (len(items) + jobs * 4 - 1) // (jobs * 4))
        chunks = [items[i : i + chunk_size] for i in range(0, len(items), chunk_size)]
        results = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(
                _panel_worker, [(spec, tol_wire, c) for c in chunks]
            ):
                results.extend(part)
    results.sort(key=lambda r: r[0])
    values = tuple(_from_wire(r[1]) for r in results)
    errors = tuple(_from_wire(r[2]) for r in results)
    return values, errors


# ---------------------------------------------------------------------------
# Zero location
# ---------------------------------------------------------------------------

_ZERO_CACHE: dict = {}


def _scan_worker(args: tuple) -> list:
    """Find and refine sign changes on grid pairs [i, i+1) for i in a range."""
    bits, terms, lo_wire, step_wire, i_start, i_end = args
    ctx = PrecisionContext(bits=bits)
    lo = _from_wire(lo_wire)
    step = _from_wire(step_wire)
    found = []
    with mp.workprec(ctx.workprec):
        def zv(t):
            return z_function(t, ctx, terms=terms)[0]

        t_prev = lo + i_start * step
        f_prev = zv(t_prev)
        for i in range(i_start, i_end):
            t_next = lo + (i + 1) * step
            f_next = zv(t_next)
            if f_prev == 0:
                found.append((i, _to_wire(t_prev)))
            elif (f_prev < 0) != (f_next < 0):
                root = _refine_zero(zv, t_prev, t_next, f_prev, f_next)
                found.append((i, _to_wire(root)))
            t_prev, f_prev = t_next, f_next
    return found


def _refine_zero(zv: Callable, a: mpf, b: mpf, fa: mpf, fb: mpf) -> mpf:
    """Safeguarded false-position (Illinois) refinement of a bracketed root."""
    for _ in range(200):
        if b - a <= BISECT_TOL:
            break
        denom = fb - fa
        if denom == 0:
            m = (a + b) / 2
        else:
            m = b - fb * (b - a) / denom
            margin = (b - a) / 64
            if not (a + margin < m < b - margin):
                m = (a + b) / 2
        fm = zv(m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
            fb = fb / 2  # Illinois weighting keeps the bracket shrinking
        else:
            b, fb = m, fm
            fa = fa / 2
    return (a + b) / 2


def locate_zeros(
    t_lo,
    t_hi,
    ctx: PrecisionContext = DEFAULT_CTX,
    grid_step: mpf = GRID_STEP,
    jobs: int = 1,
    rs_terms: int = RS_TERMS_DEFAULT,
) -> ZeroList:
    """All sign changes of Z on (t_lo, t_hi], bisected to ~1e-12.

    The count is sanity-checked against the zero-counting main term
    (t/2pi) log(t/(2 pi e)) to within +-5; adjacent detections closer than
    one grid step raise a GridResolutionWarning.
    """
    t_lo = mpf(t_lo)
    t_hi = mpf(t_hi)
    if t_hi < t_lo or t_lo < HEAD_T:
        raise DomainError(f"need {HEAD_T} <= t_lo <= t_hi, got ({t_lo}, {t_hi})")
    if t_hi == t_lo:
        return ZeroList(ordinates=(), range=(t_lo, t_hi))
    key = (ctx.bits, rs_terms, _to_wire(grid_step), _to_wire(t_lo), _to_wire(t_hi))
    cached = _ZERO_CACHE.get(key)
    if cached is not None:
        return cached
    # reuse a wider cached scan when one covers this range
    superset = None
    for (bits, terms, step_w, lo_w, hi_w), zl in _ZERO_CACHE.items():
        if (
            bits == ctx.bits
            and terms == rs_terms
            and step_w == _to_wire(grid_step)
            and _from_wire(lo_w) <= t_lo
            and _from_wire(hi_w) >= t_hi
        ):
            superset = zl
            break
    if superset is not None:
        ordinates = tuple(z for z in superset.ordinates if t_lo < z <= t_hi)
        out = ZeroList(ordinates=ordinates, range=(t_lo, t_hi))
        _ZERO_CACHE[key] = out
        return out

    steps = int(mpmath.ceil((t_hi - t_lo) / grid_step))
    if jobs <= 1:
        raw = _scan_worker(
            (ctx.bits, rs_terms, _to_wire(t_lo), _to_wire(grid_step), 0, steps)
        )
    else:
        block = max(64, (steps + jobs * 4 - 1) // (jobs * 4))
        pieces = [
            (ctx.bits, rs_terms, _to_wire(t_lo), _to_wire(grid_step), i, min(i + block, steps))
            for i in range(0, steps, block)
        ]
        raw = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_scan_worker, pieces):
                raw.extend(part)
    raw.sort(key=lambda r: r[0])
    ordinates = []
    last_cell = None
    for cell, root_wire in raw:
        root = _from_wire(root_wire)
        if root <= t_lo or root > t_hi:
            continue
        if last_cell is not None and cell - last_cell <= 1:
            warnings.warn(
                f"zeros in adjacent scan cells near t = {float(root):.6f}; "
                f"grid step {float(grid_step)} may be too coarse",
                GridResolutionWarning,
            )
        last_cell = cell
        ordinates.append(root)

    _check_zero_count(t_lo, t_hi, len(ordinates))
    out = ZeroList(ordinates=tuple(ordinates), range=(t_lo, t_hi))
    _ZERO_CACHE[key] = out
    return out


def _counting_main_term(t: mpf) -> mpf:
    if t <= 2 * mpmath.pi:
        return mpf(0)
    x = t / (2 * mpmath.pi)
    return x * mpmath.log(x / mpmath.e)


def _check_zero_count(t_lo: mpf, t_hi: mpf, found: int) -> None:
    with mp.workprec(64):
        expected = _counting_main_term(t_hi) - max(mpf(0), _counting_main_term(t_lo))
    if abs(found - expected) > 5:
        raise DomainError(
            f"zero count {found} on ({float(t_lo)}, {float(t_hi)}] deviates from "
            f"the counting estimate {float(expected):.2f} by more than 5"
        )


# ---------------------------------------------------------------------------
# Head segment [0, HEAD_T] (below the Riemann-Siegel floor)
# ---------------------------------------------------------------------------

_HEAD_CACHE: dict = {}


def _head_samples(bits: int, step_num: int = HEAD_STEP_NUM) -> list:
    """|zeta(1/2 + it)| on the fixed head grid t = i/step_num, i = 0..10*step_num."""
    key = (bits, step_num)
    cached = _HEAD_CACHE.get(key)
    if cached is None:
        ctx = PrecisionContext(bits=bits)
        with mp.workprec(ctx.workprec):
            cached = [
                abs(zeta_em(mpmath.mpc(mpf(1) / 2, mpf(i) / step_num), ctx).value)
                for i in range(HEAD_T * step_num + 1)
            ]
        _HEAD_CACHE[key] = cached
    return cached


def _head_integral(bits: int, weight: Optional[Callable] = None) -> tuple:
    """Simpson value and error estimate for the head; weight(t) multiplies."""
    samples = _head_samples(bits)
    n = len(samples) - 1
    ctx = PrecisionContext(bits=bits)
    with mp.workprec(ctx.workprec):
        h = mpf(HEAD_T) / n
        if weight is None:
            vals = samples
        else:
            vals = [s * weight(i * h) for i, s in enumerate(samples)]
        acc = vals[0] + vals[-1]
        for i in range(1, n):
            acc += vals[i] * (4 if i % 2 else 2)
        fine = acc * h / 3
        # same rule at double step over the even-index subset
        acc2 = vals[0] + vals[-1]
        for i in range(2, n, 2):
            acc2 += vals[i] * (4 if (i // 2) % 2 else 2)
        coarse = acc2 * (2 * h) / 3
        return +fine, +abs(fine - coarse) / 15


# ---------------------------------------------------------------------------
# Moment computations
# ---------------------------------------------------------------------------

_C0_CACHE: dict = {}


def _c0_value(bits: int, prime_cutoff: int) -> mpf:
    key = (bits, prime_cutoff)
    cached = _C0_CACHE.get(key)
    if cached is None:
        spec = EulerProductSpec(
            prime_cutoff=prime_cutoff, precision=PrecisionContext(bits=bits)
        )
        cached = products.C0(spec).value
        _C0_CACHE[key] = cached
    return cached


def _first_moment_models(T: mpf, bits: int, prime_cutoff: int) -> dict:
    with mp.workprec(bits + 16):
        c0 = _c0_value(bits, prime_cutoff)
        g54 = gamma(mpf(5) / 4, PrecisionContext(bits=bits)).real
        base = c0 * T * mpmath.log(T) ** (mpf(1) / 4) / g54
        return {"cg": +base, "paper": +(mpmath.sqrt(2) * base)}


def _edges_for(zeros: ZeroList, t_lo: mpf, t_hi: mpf) -> list:
    edges = [t_lo]
    edges.extend(z for z in zeros.ordinates if t_lo < z < t_hi)
    edges.append(t_hi)
    return edges


def first_moment_sharp(
    T,
    ctx: PrecisionContext = DEFAULT_CTX,
    jobs: int = 1,
    rs_terms: int = RS_TERMS_DEFAULT,
    prime_cutoff: int = 10**5,
) -> MomentEstimate:
    """integral_0^T |zeta(1/2+it)| dt with both first-moment model constants."""
    T = mpf(T)
    if T < 20:
        raise DomainError(f"sharp moment needs T >= 20, got {T}")
    with mp.workprec(ctx.workprec):
        head, head_err = _head_integral(ctx.bits)
        zeros = locate_zeros(HEAD_T, T, ctx, jobs=jobs, rs_terms=rs_terms)
        edges = _edges_for(zeros, mpf(HEAD_T), T)
        values, errors = _run_panels(("abs_z", ctx.bits, rs_terms), edges, jobs)
        value = head + sum(values, mpf(0))
        err = head_err + sum(errors, mpf(0))
        models = _first_moment_models(T, ctx.bits, prime_cutoff)
        return MomentEstimate(
            parameter=+T,
            kind=MomentKind.FIRST_SHARP,
            value=+value,
            quadrature_error=+err,
            model_predictions=models,
            notes=f"zero-split adaptive Gauss, {len(zeros)} zeros, rs_terms={rs_terms}",
        )


def first_moment_laplace(
    delta,
    ctx: PrecisionContext = DEFAULT_CTX,
    jobs: int = 1,
    rs_terms: int = RS_TERMS_DEFAULT,
    prime_cutoff: int = 10**5,
) -> MomentEstimate:
    """integral_0^inf e^(-delta t) |zeta(1/2+it)| dt, truncated at T* = 50/delta."""
    delta = mpf(delta)
    if not 0 < delta <= mpf("0.1"):
        raise DomainError(f"delta must be in (0, 0.1], got {delta}")
    t_star = LAPLACE_TRUNC / delta
    if t_star > LAPLACE_TMAX_BUDGET:
        raise ResourceLimitError(
            f"T* = {float(t_star):.0f} exceeds the zeta budget "
            f"{float(LAPLACE_TMAX_BUDGET):.0f}; the reachable floor is "
            f"delta >= {float(LAPLACE_TRUNC / LAPLACE_TMAX_BUDGET):.0e}"
        )
    with mp.workprec(ctx.workprec):
        head, head_err = _head_integral(
            ctx.bits, weight=lambda t: mpmath.exp(-delta * t)
        )
        zeros = locate_zeros(HEAD_T, t_star, ctx, jobs=jobs, rs_terms=rs_terms)
        edges = _edges_for(zeros, mpf(HEAD_T), t_star)
        values, errors = _run_panels(
            ("abs_z_exp", ctx.bits, rs_terms, _to_wire(delta)), edges, jobs
        )
        value = head + sum(values, mpf(0))
        # dropped tail: integrand <= max|Z| e^(-delta t); relative to the head
        # it is below e^-50 which we charge conservatively as value * e^-45
        err = head_err + sum(errors, mpf(0)) + value * mpmath.exp(-45)
        c0 = _c0_value(ctx.bits, prime_cutoff)
        g54 = gamma(mpf(5) / 4, PrecisionContext(bits=ctx.bits)).real
        base = c0 / delta * mpmath.log(1 / delta) ** (mpf(1) / 4) / g54
        models = {"cg": +base, "paper": +(mpmath.sqrt(2) * base)}
        return MomentEstimate(
            parameter=+delta,
            kind=MomentKind.FIRST_LAPLACE,
            value=+value,
            quadrature_error=+err,
            model_predictions=models,
            notes=f"truncated at T*={float(t_star):.0f}, {len(zeros)} zeros",
        )


def second_moment_sharp(
    T,
    ctx: PrecisionContext = DEFAULT_CTX,
    jobs: int = 1,
    rs_terms: int = RS_TERMS_DEFAULT,
) -> MomentEstimate:
    """integral_0^T |zeta(1/2+it)|^2 dt against the classical main term
    T log(T/2pi) + (2 gamma - 1) T; validates the whole pipeline at k = 1."""
    T = mpf(T)
    if T < 20:
        raise DomainError(f"sharp moment needs T >= 20, got {T}")
    with mp.workprec(ctx.workprec):
        samples = _head_samples(ctx.bits)
        n = len(samples) - 1
        h = mpf(HEAD_T) / n
        vals = [s * s for s in samples]
        acc = vals[0] + vals[-1]
        for i in range(1, n):
            acc += vals[i] * (4 if i % 2 else 2)
        head = acc * h / 3
        acc2 = vals[0] + vals[-1]
        for i in range(2, n, 2):
            acc2 += vals[i] * (4 if (i // 2) % 2 else 2)
        head_err = abs(head - acc2 * (2 * h) / 3) / 15
        zeros = locate_zeros(HEAD_T, T, ctx, jobs=jobs, rs_terms=rs_terms)
        edges = _edges_for(zeros, mpf(HEAD_T), T)
        values, errors = _run_panels(("z_sq", ctx.bits, rs_terms), edges, jobs)
        value = head + sum(values, mpf(0))
        err = head_err + sum(errors, mpf(0))
        model = T * mpmath.log(T / (2 * mpmath.pi)) + (2 * mpmath.euler - 1) * T
        models = {"classical": +model}
        return MomentEstimate(
            parameter=+T,
            kind=MomentKind.SECOND_SHARP,
            value=+value,
            quadrature_error=+err,
            model_predictions=models,
            notes=f"zero-split adaptive Gauss, {len(zeros)} zeros",
        )


def fractional_moment_offline(
    sigma,
    T,
    ctx: PrecisionContext = DEFAULT_CTX,
    jobs: int = 1,
    series_limit: int = 10**6,
    table: Optional[CoefficientTable] = None,
) -> MomentEstimate:
    """integral_0^T |zeta(sigma+it)| dt against T * g(2 sigma).

    Tests the mean-value interpretation tau_{1/2}(n) = a(n)^2: the constant
    in the off-line first moment is the value of the squared-coefficient
    Dirichlet series at 2 sigma.
    """
    sigma = mpf(sigma)
    T = mpf(T)
    if not mpf("0.6") <= sigma <= mpf("0.9"):
        raise DomainError(f"sigma must be in [0.6, 0.9], got {sigma}")
    if T < 100:
        raise DomainError(f"off-line moment needs T >= 100, got {T}")
    with mp.workprec(ctx.workprec):
        width = mpf(3)
        n_panels = int(mpmath.ceil(T / width))
        edges = [T * i / n_panels for i in range(n_panels + 1)]
        values, errors = _run_panels(
            ("abs_em", ctx.bits, _to_wire(sigma)), edges, jobs,
            tol_per_unit=mpf("3e-6"),
        )
        value = sum(values, mpf(0))
        err = sum(errors, mpf(0))
        series = products.g_series(
            2 * sigma, series_limit, table=table, ctx=PrecisionContext(bits=ctx.bits)
        )
        models = {"series": +(T * series.value)}
        return MomentEstimate(
            parameter=+T,
            kind=MomentKind.FRACTIONAL_OFFLINE,
            value=+value,
            quadrature_error=+err,
            model_predictions=models,
            notes=f"sigma={float(sigma)}, series cutoff {series_limit}",
        )


# ---------------------------------------------------------------------------
# Lemma-4 smoothed sum
# ---------------------------------------------------------------------------


def _lemma4_cutoff(sin4d: mpf) -> int:
    return int(mpmath.ceil((LEMMA4_TRUNC / (mpmath.pi * sin4d)) ** (mpf(1) / 4)))


def lemma4_sum(
    delta,
    ctx: PrecisionContext = DEFAULT_CTX,
    table: Optional[CoefficientTable] = None,
    prime_cutoff: int = 10**5,
) -> MomentEstimate:
    """sum_n a(n)^2/(n sin 4delta) e^(-(sin 4delta) pi n^4) with its model
    A delta^-1 log^(1/4)(1/delta), A = C0 / (sqrt(2) Gamma(1/4))."""
    delta = mpf(delta)
    if not 0 < delta <= mpf("0.05"):
        raise DomainError(f"delta must be in (0, 0.05], got {delta}")
    with mp.workprec(ctx.workprec):
        sin4d = mpmath.sin(4 * delta)
        cutoff = _lemma4_cutoff(sin4d)
        if table is None:
            table = sieve_coeffs(HALF, cutoff)
        if table.limit < cutoff:
            raise DomainError(f"table limit {table.limit} below cutoff {cutoff}")
        total = mpf(0)
        pi_sin = mpmath.pi * sin4d
        for n in range(1, cutoff + 1):
            a = table.values[n]
            a2 = mpf(a.numerator * a.numerator) / mpf(a.denominator * a.denominator)
            total += a2 / (n * sin4d) * mpmath.exp(-pi_sin * mpf(n) ** 4)
        # dropped tail: each term below e^-46 * (1/(n sin)); bounded by head * e^-40
        err = total * mpmath.exp(-40)
        c0 = _c0_value(ctx.bits, prime_cutoff)
        g14 = gamma(mpf(1) / 4, PrecisionContext(bits=ctx.bits)).real
        amp = c0 / (mpmath.sqrt(2) * g14)
        model = amp / delta * mpmath.log(1 / delta) ** (mpf(1) / 4)
        models = {"paper": +model}
        return MomentEstimate(
            parameter=+delta,
            kind=MomentKind.LEMMA4_SUM,
            value=+total,
            quadrature_error=+err,
            model_predictions=models,
            notes=f"direct sum truncated at N={cutoff}",
        )


def lemma4_stieltjes(
    delta,
    ctx: PrecisionContext = DEFAULT_CTX,
    table: Optional[CoefficientTable] = None,
) -> mpf:
    """Second route for the Lemma-4 sum: Stieltjes integration against the
    exact counting function C(x) = sum_{n<=x} a(n)^2 (Abel summation over
    its jumps), sharing nothing with the direct-sum loop but the sieve."""
    delta = mpf(delta)
    if not 0 < delta <= mpf("0.05"):
        raise DomainError(f"delta must be in (0, 0.05], got {delta}")
    with mp.workprec(ctx.workprec):
        sin4d = mpmath.sin(4 * delta)
        cutoff = _lemma4_cutoff(sin4d)
        if table is None:
            table = sieve_coeffs(HALF, cutoff)
        prefix = square_prefix_sums(table, cutoff)
        pi_sin = mpmath.pi * sin4d

        def w(x: int) -> mpf:
            return mpmath.exp(-pi_sin * mpf(x) ** 4) / (x * sin4d)

        total = mpf(0)
        for n in range(1, cutoff):
            cn = prefix[n]
            cn_mpf = mpf(cn.numerator) / mpf(cn.denominator)
            total += cn_mpf * (w(n) - w(n + 1))
        c_last = prefix[cutoff]
        total += (mpf(c_last.numerator) / mpf(c_last.denominator)) * w(cutoff)
        return +total


# ---------------------------------------------------------------------------
# Constant fitting and the discrimination experiment
# ---------------------------------------------------------------------------


def fit_constant(
    data: Sequence,
    ctx: PrecisionContext = DEFAULT_CTX,
    prime_cutoff: int = 10**5,
    with_references: bool = True,
) -> FitResult:
    """Least squares for value ~ C * T * log^(1/4) T through the origin.

    Reports the fitted constant, per-point residuals and ratios, and the two
    candidate constants the experiment discriminates between.
    """
    if len(data) < 3:
        raise DegenerateFitError("need at least 3 data points")
    with mp.workprec(ctx.workprec):
        ts = [mpf(t) for t, _ in data]
        vs = [mpf(v) for _, v in data]
        for a, b in zip(ts, ts[1:]):
            if not a < b:
                raise DegenerateFitError("T values must be strictly ascending")
        if ts[-1] / ts[0] < 10:
            raise DegenerateFitError(
                f"data spans {float(ts[-1] / ts[0]):.2f}x in T; need at least a decade"
            )
        xs = [t * mpmath.log(t) ** (mpf(1) / 4) for t in ts]
        sxx = sum((x * x for x in xs), mpf(0))
        sxv = sum((x * v for x, v in zip(xs, vs)), mpf(0))
        c_hat = sxv / sxx
        residuals = tuple(+(v - c_hat * x) for v, x in zip(vs, xs))
        ratios = tuple(+(v / x) for v, x in zip(vs, xs))
        ref_paper = ref_cg = None
        if with_references:
            c0 = _c0_value(ctx.bits, prime_cutoff)
            g54 = gamma(mpf(5) / 4, PrecisionContext(bits=ctx.bits)).real
            ref_cg = +(c0 / g54)
            ref_paper = +(mpmath.sqrt(2) * c0 / g54)
        return FitResult(
            c_hat=+c_hat,
            residuals=residuals,
            point_ratios=ratios,
            reference_paper=ref_paper,
            reference_cg=ref_cg,
        )


@dataclass(frozen=True)
class DiscriminationReport:
    """Evidence table for the sharp-moment constant: computed values, the
    fitted constant, and both reference constants.  No adjudication."""

    estimates: tuple
    fit: FitResult
    ratio_spread: mpf  # (max - min) point ratio over the fitted constant


def discrimination_experiment(
    t_values: Sequence,
    ctx: PrecisionContext = DEFAULT_CTX,
    jobs: int = 1,
    rs_terms: int = RS_TERMS_DEFAULT,
    prime_cutoff: int = 10**5,
) -> DiscriminationReport:
    """first_moment_sharp at each T (sharing one zero pass), then the fit.

    The zero scan and the inter-zero panels are computed once up to max(T);
    each requested T reuses the panel prefix plus one partial panel.
    """
    ts = sorted(mpf(t) for t in t_values)
    if ts[0] < 20:
        raise DomainError("discrimination needs T >= 20")
    t_max = ts[-1]
    with mp.workprec(ctx.workprec):
        head, head_err = _head_integral(ctx.bits)
        zeros = locate_zeros(HEAD_T, t_max, ctx, jobs=jobs, rs_terms=rs_terms)
        edges = _edges_for(zeros, mpf(HEAD_T), t_max)
        values, errors = _run_panels(("abs_z", ctx.bits, rs_terms), edges, jobs)
        # prefix sums over complete panels
        estimates = []
        f, _ = _build_integrand(("abs_z", ctx.bits, rs_terms))
        for T in ts:
            acc = head
            errsum = head_err
            for i in range(len(edges) - 1):
                if edges[i + 1] <= T:
                    acc += values[i]
                    errsum += errors[i]
                else:
                    if edges[i] < T:
                        part, perr = _adaptive_panel(
                            f, edges[i], T, QUAD_TOL_PER_UNIT * (T - edges[i])
                        )
                        acc += part
                        errsum += perr
                    break
            models = _first_moment_models(T, ctx.bits, prime_cutoff)
            estimates.append(
                MomentEstimate(
                    parameter=+T,
                    kind=MomentKind.FIRST_SHARP,
                    value=+acc,
                    quadrature_error=+errsum,
                    model_predictions=models,
                    notes="batched (shared zero pass)",
                )
            )
        fit = fit_constant(
            [(e.parameter, e.value) for e in estimates],
            ctx=ctx,
            prime_cutoff=prime_cutoff,
        )
        spread = (max(fit.point_ratios) - min(fit.point_ratios)) / fit.c_hat
        return DiscriminationReport(
            estimates=tuple(estimates), fit=fit, ratio_spread=+spread
        )


def simpson_oracle(
    t_lo,
    t_hi,
    ctx: PrecisionContext = DEFAULT_CTX,
    power: int = 1,
    max_step: mpf = mpf("0.001"),
    rs_terms: int = RS_TERMS_DEFAULT,
) -> mpf:
    """Independent fixed-step Simpson integral of |Z|^power on [t_lo, t_hi].

    Shares only the zero locations with the adaptive route (segments are
    integrated separately so the composite rule never crosses a kink)."""
    t_lo = mpf(t_lo)
    t_hi = mpf(t_hi)
    zeros = locate_zeros(t_lo, t_hi, ctx, rs_terms=rs_terms)
    edges = _edges_for(zeros, t_lo, t_hi)
    with mp.workprec(ctx.workprec):
        if power == 1:
            def f(t):
                return abs(z_function(t, ctx, terms=rs_terms)[0])
        elif power == 2:
            def f(t):
                z = z_function(t, ctx, terms=rs_terms)[0]
                return z * z
        else:
            raise DomainError("oracle covers |Z| and |Z|^2")
        total = mpf(0)
        for a, b in zip(edges, edges[1:]):
            total += _simpson_fixed(f, a, b, max_step)
        return +total


def sharp_moment_oracle(
    T,
    ctx: PrecisionContext = DEFAULT_CTX,
    power: int = 1,
    max_step: mpf = mpf("0.001"),
    rs_terms: int = RS_TERMS_DEFAULT,
) -> mpf:
    """Fixed-step Simpson version of the sharp moment on [0, T], head included."""
    T = mpf(T)
    with mp.workprec(ctx.workprec):
        em_ctx = PrecisionContext(bits=ctx.bits)

        def head_f(t):
            v = abs(zeta_em(mpmath.mpc(mpf(1) / 2, t), em_ctx).value)
            return v if power == 1 else v * v

        head = _simpson_fixed(head_f, mpf(0), mpf(HEAD_T), max_step)
        return +(head + simpson_oracle(HEAD_T, T, ctx, power, max_step, rs_terms))
