"""Exact-rational coefficients of the Dirichlet series of zeta(s)**k.

The series zeta(s)**k = sum d_k(n) n^(-s) has multiplicative coefficients
determined on prime powers by a Pochhammer ratio that does not depend on the
prime.  For k = 1/2 the values satisfy 0 < d_{1/2}(n) <= 1 and the square of
the series is zeta itself, so the convolution d_{1/2} * d_{1/2} must equal
the constant-1 function exactly.  Everything in this module stays in exact
rational arithmetic to keep that identity usable as a zero-tolerance oracle.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .errors import DomainError, ResourceLimitError

# Refuse tables above this many entries unless the caller raises the budget.
DEFAULT_MEMORY_BUDGET = 10**8

RationalLike = Union[Fraction, int, str]


@dataclass(frozen=True)
class FractionalOrder:
    """Order k of the divisor function d_k.  The half-integer case k = 1/2
    gives the coefficients of sqrt(zeta)."""

    k: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", Fraction(self.k))
        if self.k <= 0:
            raise DomainError(f"order must be positive, got {self.k}")

    def __str__(self) -> str:
        return str(self.k)


HALF = FractionalOrder(Fraction(1, 2))
ONE = FractionalOrder(Fraction(1))


def prime_power_coeff(order: FractionalOrder, r: int) -> Fraction:
    """d_k(p^r) as the Pochhammer product prod_{j<r} (k+j)/(j+1).

    The value does not depend on which prime the power belongs to; r = 0
    gives the empty product 1.
    """
    if r < 0:
        raise DomainError(f"prime-power exponent must be >= 0, got {r}")
    k = order.k
    value = Fraction(1)
    for j in range(r):
        value *= (k + j) / (j + 1)
    return value


def double_factorial_coeff(r: int) -> Fraction:
    """d_{1/2}(p^r) written as (1*3*...*(2r-1)) / (2^r * r!).

    Independent of :func:`prime_power_coeff`; the two constructions are
    compared termwise in the per-prime identity tests.
    """
    if r < 0:
        raise DomainError(f"prime-power exponent must be >= 0, got {r}")
    num = 1
    for odd in range(1, 2 * r, 2):
        num *= odd
    den = 2**r
    for j in range(2, r + 1):
        den *= j
    return Fraction(num, den)


def smallest_prime_factor_table(limit: int) -> list[int]:
    """spf[n] = smallest prime factor of n for 2 <= n <= limit (spf[0] = spf[1] = 0)."""
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    spf = list(range(limit + 1))
    if limit >= 1:
        spf[1] = 0
    p = 2
    while p * p <= limit:
        if spf[p] == p:  # p is prime
            for m in range(p * p, limit + 1, p):
                if spf[m] == m:
                    spf[m] = p
        p += 1
    return spf


def primes_up_to(limit: int) -> list[int]:
    """Ascending primes <= limit via a byte sieve."""
    if limit < 2:
        return []
    sieve = bytearray(b"\x01") * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    p = 2
    while p * p <= limit:
        if sieve[p]:
            start = p * p
            step = p
            sieve[start : limit + 1 : step] = b"\x00" * ((limit - start) // step + 1)
        p += 1
    return [i for i in range(2, limit + 1) if sieve[i]]


@dataclass
class CoefficientTable:
    """Values of d_k(n) for 1 <= n <= limit, exact rationals throughout.

    Immutable by convention after construction; safe to share between
    threads.  ``values[0]`` is unused padding so the table is indexed by n.
    """

    order: FractionalOrder
    limit: int
    values: list[Fraction]
    spf: Optional[list[int]] = None

    def __getitem__(self, n: int) -> Fraction:
        if not 1 <= n <= self.limit:
            raise DomainError(f"index {n} outside table range [1, {self.limit}]")
        return self.values[n]

    def __len__(self) -> int:
        return self.limit

    def items(self) -> Iterator[tuple[int, Fraction]]:
        for n in range(1, self.limit + 1):
            yield n, self.values[n]


def sieve_coeffs(
    order: FractionalOrder,
    limit: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> CoefficientTable:
    """Build the d_k table up to ``limit`` from a smallest-prime-factor sieve.

    Multiplicativity reduces each entry to one rational multiplication:
    with p = spf[n] and p^e || n, d_k(n) = d_k(n / p^e) * d_k(p^e).
    """
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    if limit > memory_budget:
        raise ResourceLimitError(
            f"table of {limit} entries exceeds memory budget {memory_budget}"
        )
    spf = smallest_prime_factor_table(limit)
    # d_k(p^r) depends only on r; precompute up to the largest exponent possible.
    max_exp = limit.bit_length()  # 2^e <= limit bounds every exponent
    coeff_of_exp = [prime_power_coeff(order, r) for r in range(max_exp + 1)]

    one = Fraction(1)
    values = [one] * (limit + 1)
    # prime_power_part[n] = p^e for p = spf[n], exponent_of[n] = e
    prime_power_part = [0] * (limit + 1)
    exponent_of = [0] * (limit + 1)
    for n in range(2, limit + 1):
        p = spf[n]
        m = n // p
        if m % p == 0:
            exponent_of[n] = exponent_of[m] + 1
            prime_power_part[n] = prime_power_part[m] * p
        else:
            exponent_of[n] = 1
            prime_power_part[n] = p
        cofactor = n // prime_power_part[n]
        values[n] = values[cofactor] * coeff_of_exp[exponent_of[n]]
    return CoefficientTable(order=order, limit=limit, values=values, spf=spf)


def dirichlet_convolve(
    a: CoefficientTable, b: CoefficientTable, limit: int
) -> CoefficientTable:
    """(a * b)(n) = sum_{d | n} a(d) b(n/d), exact, for n <= limit."""
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    if a.limit < limit or b.limit < limit:
        raise DomainError(
            f"input tables (limits {a.limit}, {b.limit}) shorter than {limit}"
        )
    zero = Fraction(0)
    out = [zero] * (limit + 1)
    av = a.values
    bv = b.values
    for d in range(1, limit + 1):
        ad = av[d]
        for m in range(1, limit // d + 1):
            out[d * m] += ad * bv[m]
    order = FractionalOrder(a.order.k + b.order.k)
    return CoefficientTable(order=order, limit=limit, values=out, spf=None)


def partial_sum_squares(table: CoefficientTable, x: int) -> Fraction:
    """sum_{n <= x} d_k(n)^2, exact."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    if x > table.limit:
        raise DomainError(f"x = {x} exceeds table limit {table.limit}")
    total = Fraction(0)
    values = table.values
    for n in range(1, x + 1):
        v = values[n]
        total += v * v
    return total


def square_prefix_sums(table: CoefficientTable, x: int) -> list[Fraction]:
    """Prefix sums C(n) = sum_{m <= n} d_k(m)^2 for 0 <= n <= x (C(0) = 0)."""
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x > table.limit:
        raise DomainError(f"x = {x} exceeds table limit {table.limit}")
    out = [Fraction(0)] * (x + 1)
    values = table.values
    running = Fraction(0)
    for n in range(1, x + 1):
        v = values[n]
        running += v * v
        out[n] = running
    return out


def write_csv(table: CoefficientTable, stream: io.TextIOBase) -> None:
    """Export as ``n,num,den`` rows (exact rational as an integer pair)."""
    stream.write("n,num,den\n")
    for n, v in table.items():
        stream.write(f"{n},{v.numerator},{v.denominator}\n")
