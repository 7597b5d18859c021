"""Zero location, zero-split quadrature, moment kinds, and the fit."""

import random

import mpmath
import pytest
from mpmath import mp, mpf

from zetalab import moments
from zetalab.coeffs import HALF, sieve_coeffs
from zetalab.errors import (
    DegenerateFitError,
    DomainError,
    ResourceLimitError,
)
from zetalab.moments import (
    MomentEstimate,
    MomentKind,
    ZeroList,
    fit_constant,
    first_moment_laplace,
    first_moment_sharp,
    fractional_moment_offline,
    lemma4_stieltjes,
    lemma4_sum,
    locate_zeros,
    second_moment_sharp,
    sharp_moment_oracle,
)
from zetalab.zeta import PrecisionContext, z_function

CTX = PrecisionContext(bits=128)

# ordinates of the first three sign changes, classical values
FIRST_ZEROS = ("14.134725141734694", "21.022039638771555", "25.010857580145689")


@pytest.fixture(scope="module")
def zeros_10_100():
    return locate_zeros(10, 100, CTX)


def test_first_three_zeros(zeros_10_100):
    found = zeros_10_100.ordinates[:3]
    with mp.workprec(128):
        for got, ref in zip(found, FIRST_ZEROS):
            assert abs(got - mpf(ref)) < mpf("1e-4")


def test_zero_count_to_hundred(zeros_10_100):
    assert len(zeros_10_100) == 29


def test_z_small_at_located_zero(zeros_10_100):
    z0 = zeros_10_100.ordinates[0]
    value, _ = z_function(z0, CTX)
    assert abs(value) < mpf("1e-6")


def test_sign_flips_across_each_zero(zeros_10_100):
    eps = mpf("0.01")
    for z in zeros_10_100.ordinates[:10]:
        left = z_function(z - eps, CTX)[0]
        right = z_function(z + eps, CTX)[0]
        assert (left < 0) != (right < 0)


def test_empty_range_and_domain():
    assert len(locate_zeros(15, 15, CTX)) == 0
    with pytest.raises(DomainError):
        locate_zeros(5, 50, CTX)
    with pytest.raises(DomainError):
        locate_zeros(50, 20, CTX)


def test_zero_list_validation():
    with pytest.raises(DomainError):
        ZeroList(ordinates=(mpf(20), mpf(15)), range=(mpf(10), mpf(30)))


def test_gauss_rule_is_exact_on_polynomials():
    with mp.workprec(150):
        nodes, weights = moments._gauss_legendre(12)
        # degree 22 polynomial integrates exactly with 12 nodes
        acc = sum(w * x**22 for x, w in zip(nodes, weights))
        assert abs(acc - mpf(2) / 23) < mpf("1e-40")
        val = moments._gl_integrate(mpmath.sin, mpf(0), mpmath.pi, 18)
        assert abs(val - 2) < mpf("1e-30")


def test_first_moment_matches_simpson_oracle():
    est = first_moment_sharp(20, CTX)
    oracle = sharp_moment_oracle(20, CTX, power=1)
    with mp.workprec(128):
        assert abs(est.value - oracle) < mpf("1e-6")


def test_first_moment_monotone_in_t():
    a = first_moment_sharp(20, CTX)
    b = first_moment_sharp(25, CTX)
    assert b.value > a.value


def test_model_predictions_carry_sqrt2():
    est = first_moment_sharp(20, CTX)
    # bitwise: the paper model is sqrt(2) times the cg model, as computed
    with mp.workprec(CTX.bits + 16):  # the models' construction precision
        expected = mpmath.sqrt(2) * est.model_predictions["cg"]
    assert est.model_predictions["paper"] == expected


def test_first_moment_domain():
    with pytest.raises(DomainError):
        first_moment_sharp(10, CTX)


def test_jobs_do_not_change_bits():
    moments._ZERO_CACHE.clear()
    a = first_moment_sharp(40, CTX, jobs=1)
    moments._ZERO_CACHE.clear()
    b = first_moment_sharp(40, CTX, jobs=2)
    assert a.value == b.value
    assert a.quadrature_error == b.quadrature_error


@pytest.mark.slow
def test_adaptive_vs_simpson_oracle_both_powers():
    # |Z| and |Z|^2 on [10, 100]: independent quadrature routes to 1e-6
    for power, spec in ((1, ("abs_z", CTX.bits, 4)), (2, ("z_sq", CTX.bits, 4))):
        zeros = locate_zeros(10, 100, CTX)
        edges = moments._edges_for(zeros, mpf(10), mpf(100))
        values, _ = moments._run_panels(spec, edges, jobs=2)
        with mp.workprec(CTX.workprec):
            adaptive = sum(values, mpf(0))
        oracle = moments.simpson_oracle(10, 100, CTX, power=power)
        with mp.workprec(128):
            assert abs(adaptive - oracle) < mpf("1e-6")


def test_laplace_below_sharp_and_budget():
    lap = first_moment_laplace(mpf("0.1"), CTX, jobs=2)
    sharp = first_moment_sharp(500, CTX, jobs=2)
    assert lap.value <= sharp.value
    assert lap.kind is MomentKind.FIRST_LAPLACE
    with pytest.raises(ResourceLimitError):
        first_moment_laplace(mpf("1e-4"), CTX)
    with pytest.raises(DomainError):
        first_moment_laplace(mpf("0.2"), CTX)


@pytest.mark.slow
def test_laplace_against_weighted_simpson():
    delta = mpf("0.1")
    est = first_moment_laplace(delta, CTX, jobs=2)
    ctx = CTX
    zeros = locate_zeros(10, 500, ctx)
    edges = moments._edges_for(zeros, mpf(10), mpf(500))
    with mp.workprec(ctx.workprec):
        def f(t):
            return abs(z_function(t, ctx)[0]) * mpmath.exp(-delta * t)

        tail = mpf(0)
        for a, b in zip(edges, edges[1:]):
            tail += moments._simpson_fixed(f, a, b, mpf("0.002"))
        head, _ = moments._head_integral(ctx.bits, weight=lambda t: mpmath.exp(-delta * t))
        oracle = head + tail
        assert abs(est.value - oracle) < mpf("1e-6")


def test_second_moment_oracle_and_cauchy_schwarz():
    m2 = second_moment_sharp(100, CTX, jobs=2)
    oracle = sharp_moment_oracle(100, CTX, power=2, max_step=mpf("0.002"))
    with mp.workprec(128):
        assert abs(m2.value - oracle) < mpf("1e-6")
    m1 = first_moment_sharp(100, CTX, jobs=2)
    with mp.workprec(128):
        assert m2.value >= m1.value**2 / 100


def test_offline_band_at_small_scale():
    table = sieve_coeffs(HALF, 10**4)
    ctx = PrecisionContext(bits=80)
    est = fractional_moment_offline(
        mpf("0.75"), 150, ctx, jobs=2, series_limit=10**4, table=table
    )
    with mp.workprec(96):
        ratio = est.value / est.model_predictions["series"]
    assert mpf("0.8") < ratio < mpf("1.2")


@pytest.mark.slow
def test_offline_trend_and_convergence_regime():
    table = sieve_coeffs(HALF, 10**4)
    ctx = PrecisionContext(bits=80)

    def ratio(sigma, T):
        est = fractional_moment_offline(
            mpf(sigma), T, ctx, jobs=2, series_limit=10**4, table=table
        )
        with mp.workprec(96):
            return est.value / est.model_predictions["series"]

    # doubling T shrinks the drift from the mean-value model
    drift_150 = abs(ratio("0.75", 150) - 1)
    drift_300 = abs(ratio("0.75", 300) - 1)
    assert drift_300 < drift_150
    # near sigma = 1 the series converges fast and the ratio stabilizes
    assert abs(ratio("0.9", 120) - 1) < mpf("0.05")


def test_offline_domain():
    with pytest.raises(DomainError):
        fractional_moment_offline(mpf("0.5"), 200, CTX)
    with pytest.raises(DomainError):
        fractional_moment_offline(mpf("0.75"), 50, CTX)


def test_lemma4_cutoff_scale():
    with mp.workprec(96):
        n = moments._lemma4_cutoff(mpmath.sin(4 * mpf("1e-6")))
    assert 43 <= n <= 46


def test_lemma4_two_routes_and_domain():
    direct = lemma4_sum(mpf("1e-3"), CTX)
    other = lemma4_stieltjes(mpf("1e-3"), CTX)
    with mp.workprec(CTX.workprec):
        assert abs(direct.value - other) / direct.value < mpf("1e-10")
    with pytest.raises(DomainError):
        lemma4_sum(mpf("0.06"), CTX)


def test_lemma4_model_band_across_deltas():
    # the loglog-size corrections keep this away from 1; broad band only
    for d in ("1e-3", "1e-5", "1e-8"):
        est = lemma4_sum(mpf(d), CTX)
        with mp.workprec(96):
            ratio = est.value / est.model_predictions["paper"]
        assert mpf("0.6") < ratio < mpf("1.4")


def test_fit_constant_exact_and_noisy():
    with mp.workprec(192):
        data = [(T, 3 * mpf(T) * mpmath.log(T) ** mpf("0.25")) for T in (100, 300, 1000, 3000)]
    fit = fit_constant(data, with_references=False)
    with mp.workprec(96):
        assert abs(fit.c_hat - 3) < mpf("1e-30")
        assert all(abs(r - 3) < mpf("1e-30") for r in fit.point_ratios)
    rng = random.Random(12345)
    with mp.workprec(192):
        noisy = [
            (T, 3 * mpf(T) * mpmath.log(T) ** mpf("0.25") * (1 + mpf(rng.uniform(-0.01, 0.01))))
            for T in (100, 200, 500, 1000, 2000)
        ]
    fit2 = fit_constant(noisy, with_references=False)
    with mp.workprec(96):
        assert abs(fit2.c_hat - 3) / 3 < mpf("0.015")


def test_fit_constant_degeneracy():
    with pytest.raises(DegenerateFitError):
        fit_constant([(100, 1), (200, 2)], with_references=False)
    with pytest.raises(DegenerateFitError):
        fit_constant([(100, 1), (300, 2), (900, 3)], with_references=False)
    with pytest.raises(DegenerateFitError):
        fit_constant([(100, 1), (90, 2), (2000, 3)], with_references=False)


def test_moment_estimate_validation():
    with pytest.raises(DomainError):
        MomentEstimate(
            parameter=mpf(1),
            kind=MomentKind.FIRST_SHARP,
            value=mpf(-1),
            quadrature_error=mpf(0),
            model_predictions={},
        )
