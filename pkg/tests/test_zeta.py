"""zeta/gamma/chi/Z/theta evaluators against closed forms and each other.

The two zeta routes (Euler-Maclaurin and Riemann-Siegel) are written
independently, so their agreement within the sum of their recorded error
bounds is the main oracle here.
"""

import random

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from zetalab.errors import DomainError, PoleError, PrecisionError, SingularityError
from zetalab.zeta import (
    Method,
    PrecisionContext,
    ZetaSample,
    chi,
    convexity_bound_check,
    gamma,
    gamma_quarter_stirling_check,
    theta,
    theta_with_bound,
    z_function,
    zeta_em,
    zeta_rs,
)

CTX = PrecisionContext(bits=256)
CTX128 = PrecisionContext(bits=128)

ZETA_HALF = "-1.460354508809586812889499152515298012467"
ZETA_THREE = "1.202056903159594285399738161511449990765"


def test_zeta_two_reference_points():
    s2 = zeta_em(2, CTX)
    with mp.workprec(300):
        assert abs(s2.value - mpmath.pi**2 / 6) <= s2.abs_error_bound
    s3 = zeta_em(3, CTX)
    with mp.workprec(300):
        assert abs(s3.value - mpf(ZETA_THREE)) < mpf(10) ** -38


def test_zeta_at_zero_and_half():
    s0 = zeta_em(0, CTX)
    with mp.workprec(300):
        assert abs(s0.value + mpf(1) / 2) <= s0.abs_error_bound
    sh = zeta_em(mpf(1) / 2, CTX)
    with mp.workprec(300):
        assert abs(sh.value - mpf(ZETA_HALF)) < mpf(10) ** -38


def test_zeta_pole():
    with pytest.raises(PoleError):
        zeta_em(1, CTX)


def test_zeta_conjugate_symmetry():
    rng = random.Random(11)
    for _ in range(5):
        s = mpc(rng.uniform(0.3, 2), rng.uniform(1, 60))
        a = zeta_em(s, CTX)
        b = zeta_em(mpc(s.real, -s.imag), CTX)
        with mp.workprec(300):
            gap = abs(a.value - mpmath.conj(b.value))
        assert gap <= a.abs_error_bound + b.abs_error_bound


def test_precision_monotonicity():
    s = mpc(mpf(1) / 2, 37)
    bounds = [zeta_em(s, PrecisionContext(bits=b)).abs_error_bound for b in (64, 128, 256)]
    assert bounds[0] >= bounds[1] >= bounds[2]


def test_cross_method_agreement_fifty_points():
    rng = random.Random(20250808)
    for _ in range(50):
        t = mpf(rng.uniform(20, 5000))
        em = zeta_em(mpc(mpf(1) / 2, t), CTX)
        rs = zeta_rs(t, terms=4, ctx=CTX)
        gap = abs(abs(rs.value) - abs(em.value))
        assert gap <= rs.abs_error_bound + em.abs_error_bound


@pytest.mark.parametrize("terms", [0, 1, 2, 3, 4])
def test_rs_correction_orders_within_bounds(terms):
    t = mpf("300.25")
    em = zeta_em(mpc(mpf(1) / 2, t), CTX)
    z, bound = z_function(t, CTX, terms=terms)
    assert abs(abs(z) - abs(em.value)) <= bound + em.abs_error_bound


def test_rs_bound_decreases_with_terms():
    bounds = [z_function(500, CTX128, terms=k)[1] for k in range(5)]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))


def test_rs_domain_floor():
    with pytest.raises(DomainError):
        z_function(5, CTX128)
    with pytest.raises(DomainError):
        z_function(100, CTX128, terms=7)


def test_rs_sample_lives_on_critical_line():
    sample = zeta_rs(100, ctx=CTX128)
    assert sample.method is Method.RIEMANN_SIEGEL
    assert sample.s.real == mpf(1) / 2
    with pytest.raises(DomainError):
        ZetaSample(
            s=mpc("0.6", "10"),
            value=mpc(1),
            method=Method.RIEMANN_SIEGEL,
            abs_error_bound=mpf(0),
        )


def test_sign_change_across_first_zero():
    a = z_function(mpf("14.10"), CTX128)[0]
    b = z_function(mpf("14.16"), CTX128)[0]
    assert (a < 0) != (b < 0)


def test_theta_against_log_gamma_route():
    # independent route: Im log Gamma(1/4 + it/2) - (t/2) log pi via mpmath
    for t in (15, 100, 777, 2000):
        mine = theta(mpf(t), CTX)
        with mp.workprec(330):
            ref = mpmath.loggamma(mpc(mpf(1) / 4, mpf(t) / 2)).imag - mpf(t) / 2 * mpmath.log(mpmath.pi)
            assert abs(mine - ref) < mpf(10) ** -60


def test_theta_bound_is_reported():
    value, bound = theta_with_bound(50, CTX)
    assert bound > 0
    assert bound < CTX.target_abs_error


def test_z_reality_of_rotated_zeta():
    for t in (20, 100, 777):
        t = mpf(t)
        th = theta(t, CTX)
        zv = zeta_em(mpc(mpf(1) / 2, t), CTX).value
        with mp.workprec(300):
            assert abs((mpmath.exp(mpc(0, th)) * zv).imag) < mpf(10) ** -20


def test_chi_modulus_one_on_critical_line():
    rng = random.Random(3)
    for _ in range(20):
        t = mpf(rng.uniform(1, 1000))
        c = chi(mpc(mpf(1) / 2, t), CTX)
        assert abs(abs(c) - 1) < mpf(10) ** -25


def test_chi_real_positive_on_unit_interval():
    for x in ("0.1", "0.5", "0.9"):
        c = chi(mpf(x), CTX)
        assert abs(c.imag) < mpf(10) ** -60
        assert c.real > 0


def test_chi_functional_equation():
    s = mpc("0.75", "20")
    lhs = zeta_em(1 - s, CTX)
    rhs = zeta_em(s, CTX)
    c = chi(s, CTX)
    with mp.workprec(300):
        resid = abs(lhs.value * c - rhs.value)
    assert resid <= (abs(c) + 1) * (lhs.abs_error_bound + rhs.abs_error_bound) + mpf(10) ** -60


def test_chi_excluded_points():
    for bad in (3, 1, 0, -2):
        with pytest.raises(SingularityError):
            chi(bad, CTX)
    # even negative / odd positive are excluded; others fine
    chi(-1, CTX)
    chi(2, CTX)


def test_gamma_reflection_product():
    with mp.workprec(300):
        g = gamma(mpf(1) / 4, CTX) * gamma(mpf(3) / 4, CTX)
        assert abs(g - mpmath.pi * mpmath.sqrt(2)) < mpf(10) ** -30


def test_gamma_recurrence_and_poles():
    with mp.workprec(300):
        assert abs(gamma(mpf(5) / 4, CTX) - gamma(mpf(1) / 4, CTX) / 4) < mpf(10) ** -40
    assert abs(gamma(1, CTX) - 1) < mpf(10) ** -50
    with pytest.raises(PoleError):
        gamma(0, CTX)
    with pytest.raises(PoleError):
        gamma(-3, CTX)


def test_quarter_stirling_error_decreases():
    rows = gamma_quarter_stirling_check([10, 100, 1000], CTX)
    rels = [r[1] for r in rows]
    assert rels[0] > rels[1] > rels[2]
    assert all(scaled < mpf("0.25") for _, _, scaled in rows)


def test_quarter_stirling_uniform_in_sigma():
    for sigma in (0, 1):
        rows = gamma_quarter_stirling_check([50], CTX, sigma=sigma)
        assert rows[0][2] < mpf("0.25")
    with pytest.raises(DomainError):
        gamma_quarter_stirling_check([50], CTX, sigma=2)
    with pytest.raises(DomainError):
        gamma_quarter_stirling_check([0], CTX)


def test_convexity_bound_grid():
    ctx = PrecisionContext(bits=96)
    samples = [mpc(sigma, t) for sigma in ("0.5", "0.75", "1") for t in (10, 100, 1000)]
    coarse = convexity_bound_check(samples, ctx)
    assert mpmath.isfinite(coarse)
    # the sigma = 1 row alone is bounded by |zeta(1+it)| / log(2+t)
    row = convexity_bound_check([mpc(1, 10)], ctx)
    with mp.workprec(128):
        direct = abs(zeta_em(mpc(1, 10), ctx).value) / mpmath.log(12)
        assert abs(row - direct) < mpf(10) ** -20
    # refining the grid cannot double the maximum (smoke stability)
    finer = samples + [mpc("0.6", 50), mpc("0.9", 500), mpc("0.75", 30)]
    assert convexity_bound_check(finer, ctx) <= 2 * coarse


def test_convexity_domain():
    with pytest.raises(DomainError):
        convexity_bound_check([mpc("0.3", 10)], CTX128)
    with pytest.raises(DomainError):
        convexity_bound_check([mpc("0.75", 10**5)], CTX128)


def test_precision_context_validation():
    with pytest.raises(DomainError):
        PrecisionContext(bits=32)
    with pytest.raises(DomainError):
        PrecisionContext(bits=128, target_abs_error=mpf(0))
