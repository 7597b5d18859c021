"""Exact-rational coefficient table: identities with zero tolerance."""

import io
import random
from fractions import Fraction

import pytest

from zetalab import coeffs
from zetalab.coeffs import (
    HALF,
    ONE,
    FractionalOrder,
    dirichlet_convolve,
    double_factorial_coeff,
    partial_sum_squares,
    prime_power_coeff,
    sieve_coeffs,
    square_prefix_sums,
)
from zetalab.errors import DomainError, ResourceLimitError


@pytest.mark.parametrize(
    "r,expected",
    [(0, Fraction(1)), (1, Fraction(1, 2)), (2, Fraction(3, 8)), (3, Fraction(5, 16))],
)
def test_prime_power_half_values(r, expected):
    assert prime_power_coeff(HALF, r) == expected


def test_prime_power_order_one_is_constant():
    for r in range(8):
        assert prime_power_coeff(ONE, r) == 1
    assert prime_power_coeff(ONE, 5) == 1


def test_double_factorial_matches_pochhammer():
    for r in range(30):
        assert double_factorial_coeff(r) == prime_power_coeff(HALF, r)


def test_prime_power_strictly_decreasing():
    prev = prime_power_coeff(HALF, 1)
    for r in range(2, 40):
        cur = prime_power_coeff(HALF, r)
        assert cur < prev
        prev = cur


def test_negative_exponent_rejected():
    with pytest.raises(DomainError):
        prime_power_coeff(HALF, -1)
    with pytest.raises(DomainError):
        double_factorial_coeff(-2)


def test_order_must_be_positive():
    with pytest.raises(DomainError):
        FractionalOrder(Fraction(0))
    with pytest.raises(DomainError):
        FractionalOrder(Fraction(-1, 2))


def test_sieve_small_values():
    table = sieve_coeffs(HALF, 12)
    assert table[1] == 1
    assert table[12] == Fraction(3, 16)  # a(4) a(3) = (3/8)(1/2)
    assert table[2] == Fraction(1, 2)


def test_sieve_bounds_and_primes():
    table = sieve_coeffs(HALF, 100)
    for n in range(1, 101):
        assert 0 < table[n] <= 1
    for p in (2, 3, 5, 7, 11, 97):
        assert table[p] == Fraction(1, 2)


def test_sieve_matches_factorization():
    limit = 5000
    table = sieve_coeffs(HALF, limit)
    rng = random.Random(20250808)
    for _ in range(200):
        n = rng.randrange(2, limit + 1)
        m = n
        value = Fraction(1)
        while m > 1:
            p = table.spf[m]
            r = 0
            while m % p == 0:
                m //= p
                r += 1
            value *= prime_power_coeff(HALF, r)
        assert table[n] == value


def test_multiplicativity_on_coprime_pairs():
    limit = 10**4
    table = sieve_coeffs(HALF, limit)
    rng = random.Random(7)
    checked = 0
    while checked < 200:
        m = rng.randrange(2, 300)
        n = rng.randrange(2, limit // m)
        from math import gcd

        if gcd(m, n) != 1:
            continue
        assert table[m * n] == table[m] * table[n]
        checked += 1


def test_convolution_of_half_order_is_one():
    limit = 10**4
    table = sieve_coeffs(HALF, limit)
    conv = dirichlet_convolve(table, table, limit)
    assert all(conv.values[n] == 1 for n in range(1, limit + 1))


def test_convolution_square_matches_double_order():
    # d_k * d_k = d_2k entrywise, checked for k = 1/2 and k = 1
    limit = 10**4
    half = sieve_coeffs(HALF, limit)
    assert all(
        v == w
        for v, w in zip(
            dirichlet_convolve(half, half, limit).values[1:],
            sieve_coeffs(ONE, limit).values[1:],
        )
    )
    one = sieve_coeffs(ONE, limit)
    two = sieve_coeffs(FractionalOrder(Fraction(2)), limit)
    conv = dirichlet_convolve(one, one, limit)
    assert conv.values[1:] == two.values[1:]


def test_convolution_counts_divisors():
    limit = 100
    one = sieve_coeffs(ONE, limit)
    tau = dirichlet_convolve(one, one, limit)
    assert tau[12] == 6
    assert tau[36] == 9


def test_convolution_hand_value_at_four():
    table = sieve_coeffs(HALF, 4)
    conv = dirichlet_convolve(table, table, 4)
    # a(1)a(4) + a(2)a(2) + a(4)a(1) = 3/8 + 1/4 + 3/8
    assert conv[4] == Fraction(3, 8) + Fraction(1, 4) + Fraction(3, 8) == 1


def test_partial_sum_squares_values():
    table = sieve_coeffs(HALF, 10)
    assert partial_sum_squares(table, 1) == 1
    assert partial_sum_squares(table, 4) == Fraction(105, 64)


def test_partial_sum_range_error():
    table = sieve_coeffs(HALF, 10)
    with pytest.raises(DomainError):
        partial_sum_squares(table, 11)


def test_square_prefix_sums_consistent():
    table = sieve_coeffs(HALF, 50)
    prefix = square_prefix_sums(table, 50)
    assert prefix[0] == 0
    for x in (1, 7, 50):
        assert prefix[x] == partial_sum_squares(table, x)


def test_memory_budget_guardrail():
    with pytest.raises(ResourceLimitError):
        sieve_coeffs(HALF, 10**8 + 1)
    # a custom, tighter budget is honored too
    with pytest.raises(ResourceLimitError):
        sieve_coeffs(HALF, 1000, memory_budget=100)


def test_csv_export():
    table = sieve_coeffs(HALF, 4)
    buf = io.StringIO()
    coeffs.write_csv(table, buf)
    assert buf.getvalue() == "n,num,den\n1,1,1\n2,1,2\n3,1,2\n4,3,8\n"


def test_table_index_errors():
    table = sieve_coeffs(HALF, 10)
    with pytest.raises(DomainError):
        table[0]
    with pytest.raises(DomainError):
        table[11]
