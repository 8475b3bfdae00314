"""Local machinery: Legendre and Hilbert symbols, ramification sets, Z_(p)
membership, sums of three and four squares, and multiplicative independence
modulo squares."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .exact import (
    FactorizationBudgetExceeded,
    Q,
    RationalLike,
    factor,
    factor_budget,
    factor_int,
    is_prime,
    is_square,
    squarefree_part,
    valuation,
)

INF = "inf"
Place = Union[int, str]  # a prime, or INF for the real place

MAX_INDEPENDENCE_N = 20


class SearchBudgetExceeded(RuntimeError):
    """A decomposition exists but the configured search effort ran out."""


def check_place(v: Place) -> Place:
    if v == INF:
        return v
    if not isinstance(v, int) or not is_prime(v):
        raise ValueError(f"{v!r} is neither a prime nor the real place")
    return v


def legendre(a: int, p: int) -> int:
    if p == 2 or not is_prime(p):
        raise ValueError("legendre needs an odd prime")
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _split(n: int, p: int) -> tuple[int, int]:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e, n


def hilbert(a: RationalLike, b: RationalLike, v: Place) -> int:
    """Hilbert symbol (a, b)_v via the closed formulas on valuations and
    unit parts (Serre, Cours d'arithmetique III.1.2)."""
    a, b = Q(a), Q(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    v = check_place(v)
    if v == INF:
        return -1 if a < 0 and b < 0 else 1
    # num*den lies in the same square class as num/den
    x = a.numerator * a.denominator
    y = b.numerator * b.denominator
    alpha, u = _split(x, v)
    beta, w = _split(y, v)
    if v != 2:
        s = (-1) ** (alpha * beta * ((v - 1) // 2) % 2)
        if beta % 2:
            s *= legendre(u, v)
        if alpha % 2:
            s *= legendre(w, v)
        return s

    def eps(n: int) -> int:
        return ((n - 1) // 2) % 2

    def omega(n: int) -> int:
        return ((n * n - 1) // 8) % 2

    e = eps(u) * eps(w) + alpha * omega(w) + beta * omega(u)
    return -1 if e % 2 else 1


def candidate_primes(*xs: RationalLike) -> list[int]:
    """Primes where a Hilbert symbol among the given rationals can be -1."""
    ps = {2}
    for x in xs:
        x = Q(x)
        ps.update(factor_int(abs(x.numerator)))
        ps.update(factor_int(x.denominator))
    return sorted(ps)


def delta_set(a: RationalLike, b: RationalLike) -> tuple[int, ...]:
    """Primes p with (a, b)_p = -1, sorted."""
    out = tuple(p for p in candidate_primes(a, b) if hilbert(a, b, p) == -1)
    if (len(out) + (hilbert(a, b, INF) == -1)) % 2:
        raise ArithmeticError(f"product formula fails for ({a}, {b})")
    return out


def in_Zp(r: RationalLike, p: int) -> bool:
    r = Q(r)
    return r == 0 or r.denominator % p != 0


def in_Zp_unit(r: RationalLike, p: int) -> bool:
    r = Q(r)
    return r != 0 and r.numerator % p != 0 and r.denominator % p != 0


def is_local_square(x: RationalLike, v: Place) -> bool:
    """Whether x is a square in the completion Q_v."""
    x = Q(x)
    if x == 0:
        return True
    if v == INF:
        return x > 0
    e = valuation(x, v)
    if e % 2:
        return False
    n = x.numerator * x.denominator
    _, u = _split(n, v)
    if v == 2:
        return u % 8 == 1
    return legendre(u, v) == 1


# -- sums of squares ----------------------------------------------------------

def three_squares_integer(n: int) -> bool:
    """Gauss-Legendre: n is a sum of three squares iff n != 4^k (8m + 7)."""
    if n < 0:
        return False
    if n == 0:
        return True
    while n % 4 == 0:
        n //= 4
    return n % 8 != 7


def three_squares_rational(r: RationalLike) -> bool:
    r = Q(r)
    if r < 0:
        return False
    return three_squares_integer(r.numerator * r.denominator)


def lemma31_decide(r: RationalLike) -> bool:
    """Decide r in Z_(2) through solvability of 7r^2 + 2 = x^2 + y^2 + z^2."""
    r = Q(r)
    return three_squares_rational(7 * r * r + 2)


def _sqrt_minus_one(p: int) -> int:
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return pow(c, (p - 1) // 4, p)
    raise ValueError(p)


def _prime_two_squares(p: int) -> tuple[int, int]:
    """Write a prime p = 1 (mod 4) as a^2 + b^2 (Hermite-Serret descent)."""
    a, b = p, _sqrt_minus_one(p)
    bound = math.isqrt(p)
    while b > bound:
        a, b = b, a % b
    c = math.isqrt(p - b * b)
    return b, c


def two_squares(n: int) -> tuple[int, int] | None:
    """A decomposition n = a^2 + b^2, or None when none exists."""
    if n < 0:
        return None
    if n == 0:
        return 0, 0
    re, im = 1, 0
    for p, e in factor_int(n).items():
        if p == 2:
            for _ in range(e):
                re, im = re - im, re + im  # times (1 + i)
        elif p % 4 == 3:
            if e % 2:
                return None
            re, im = re * p ** (e // 2), im * p ** (e // 2)
        else:
            x, y = _prime_two_squares(p)
            for _ in range(e):
                re, im = re * x - im * y, re * y + im * x
    return abs(re), abs(im)


# per-candidate Pollard budget in the three-square search; hard remainders are skipped
CANDIDATE_FACTOR_BUDGET = 4000


def _sum_two_possible(n: int) -> bool | None:
    """Whether n is a sum of two squares, or None if n is too hard to factor cheaply."""
    if not n:
        return True
    try:
        with factor_budget(CANDIDATE_FACTOR_BUDGET):
            fac = factor_int(n)
    except FactorizationBudgetExceeded:
        return None
    return all(p % 4 != 3 or e % 2 == 0 for p, e in fac.items())


def three_squares_int_witness(n: int, budget: int = 100_000) -> tuple[int, int, int] | None:
    if not three_squares_integer(n):
        return None
    if n == 0:
        return 0, 0, 0
    k = 0
    while n % 4 == 0:
        n //= 4
        k += 1
    x = math.isqrt(n)
    for _ in range(budget):
        if x < 0:
            break
        rest = n - x * x
        if _sum_two_possible(rest):
            y, z = two_squares(rest)
            s = 2**k
            return x * s, y * s, z * s
        x -= 1
    raise SearchBudgetExceeded(f"three-square decomposition of {n} exceeded {budget} attempts")


def three_squares_witness(r: RationalLike, budget: int = 100_000) -> tuple[Fraction, Fraction, Fraction] | None:
    r = Q(r)
    if not three_squares_rational(r):
        return None
    m, n = r.numerator, r.denominator
    x, y, z = three_squares_int_witness(m * n, budget)
    return Fraction(x, n), Fraction(y, n), Fraction(z, n)


def four_squares_witness(r: RationalLike, budget: int = 100_000) -> tuple[Fraction, ...] | None:
    r = Q(r)
    if r < 0:
        return None
    a, b = r.numerator, r.denominator
    n, k = a * b, 0
    while n and n % 4 == 0:
        n //= 4
        k += 1
    # with n % 4 != 0 a suitable w lies within a few steps of sqrt(n)
    w = math.isqrt(n)
    while not three_squares_integer(n - w * w):
        w -= 1
    x, y, z = three_squares_int_witness(n - w * w, budget)
    return tuple(Fraction(c * 2**k, b) for c in (w, x, y, z))


# -- multiplicative independence modulo squares ---------------------------------

def _square_class_vector(r: Fraction, index: dict[int, int]) -> int:
    d = squarefree_part(r)
    bits = 1 if d < 0 else 0
    for p in factor_int(abs(d)):
        if p not in index:
            index[p] = len(index) + 1
        bits |= 1 << index[p]
    return bits


def multiplicative_independent(values: Sequence[RationalLike]) -> bool:
    """True iff no nonempty subproduct of the values is a rational square.

    Square classes are vectors over GF(2) indexed by the sign and the
    primes; the question is linear independence of those vectors.
    """
    vals = [Q(v) for v in values]
    if len(vals) > MAX_INDEPENDENCE_N:
        raise ValueError(f"at most {MAX_INDEPENDENCE_N} values supported")
    if any(v == 0 for v in vals):
        raise ValueError("values must be nonzero")
    index: dict[int, int] = {}
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    for v in vals:
        vec = _square_class_vector(v, index)
        while vec:
            top = vec.bit_length() - 1
            if top not in basis:
                basis[top] = vec
                break
            vec ^= basis[top]
        else:
            return False
    return True


def subset_products_nonsquare(values: Iterable[RationalLike]) -> bool:
    """Brute-force companion of multiplicative_independent (2^n - 1 subsets)."""
    vals = [Q(v) for v in values]
    n = len(vals)
    for mask in range(1, 1 << n):
        prod = Fraction(1)
        for i in range(n):
            if mask >> i & 1:
                prod *= vals[i]
        if is_square(prod):
            return False
    return True
