"""Exact rationals, factorization, valuations and square detection.

Rationals are :class:`fractions.Fraction` throughout; it already keeps the
reduced, positive-denominator form, so structural equality is numeric
equality.
"""

from __future__ import annotations

import contextlib
import contextvars
import functools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

RationalLike = Union[int, Fraction, str]

TRIAL_LIMIT = 1000
DEFAULT_RHO_BUDGET = 200_000

_rho_budget: contextvars.ContextVar[int] = contextvars.ContextVar(
    "rho_budget", default=DEFAULT_RHO_BUDGET
)


class FactorizationBudgetExceeded(ArithmeticError):
    """A cofactor resisted the configured factoring effort."""

    def __init__(self, n: int, budget: int):
        super().__init__(f"could not split {n} within {budget} rho iterations")
        self.n = n
        self.budget = budget


@contextlib.contextmanager
def factor_budget(iterations: int) -> Iterator[None]:
    """Temporarily set the Pollard-rho iteration budget for this context."""
    if iterations <= 0:
        raise ValueError("factor budget must be positive")
    token = _rho_budget.set(iterations)
    try:
        yield
    finally:
        _rho_budget.reset(token)


def Q(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"not an exact rational: {x!r}")


def parse_rational(text: str) -> Fraction:
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"malformed rational {text!r}") from None
    if d == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(n, d)


def format_rational(r: Fraction) -> str:
    r = Q(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def height(r: RationalLike) -> int:
    r = Q(r)
    return max(abs(r.numerator), r.denominator)


# -- primality and integer factorization ------------------------------------

_SMALL_PRIMES = [p for p in range(2, TRIAL_LIMIT) if all(p % q for q in range(2, math.isqrt(p) + 1))]
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, overwhelming beyond."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES[:25]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, budget: int, rng: random.Random) -> tuple[int, int]:
    """Return (nontrivial factor or 0, iterations spent)."""
    spent = 0
    while spent < budget:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1 and spent < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            spent += r
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g, spent
    return 0, spent


def factor_int(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer."""
    if n <= 0:
        raise ValueError("factor_int needs a positive integer")
    return dict(_factor_cached(n))


@functools.lru_cache(maxsize=1 << 16)
def _factor_cached(n: int) -> tuple[tuple[int, int], ...]:
    # only successes are cached; a budget failure raises and leaves no entry
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    if n == 1 or is_prime(n):
        if n > 1:
            out[n] = 1
        return tuple(out.items())
    budget = _rho_budget.get()
    rng = random.Random(n)  # deterministic per input
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        g, spent = _brent(m, budget, rng)
        budget -= spent
        if not g:
            raise FactorizationBudgetExceeded(m, _rho_budget.get())
        stack += [g, m // g]
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class Factorization:
    sign: int
    factors: Mapping[int, int]

    def value(self) -> Fraction:
        r = Fraction(self.sign)
        for p, e in self.factors.items():
            r *= Fraction(p) ** e
        return r

    def to_json(self) -> str:
        return json.dumps({"sign": self.sign, "factors": {str(p): e for p, e in self.factors.items()}})

    @classmethod
    def from_json(cls, text: str) -> "Factorization":
        obj = json.loads(text)
        sign = obj["sign"]
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        factors = {int(p): int(e) for p, e in obj["factors"].items()}
        if any(e == 0 for e in factors.values()):
            raise ValueError("zero exponent stored")
        return cls(sign, dict(sorted(factors.items())))


def factor(r: RationalLike) -> Factorization:
    r = Q(r)
    if r == 0:
        raise ValueError("cannot factor zero")
    fs = dict(factor_int(abs(r.numerator)))
    for p, e in factor_int(r.denominator).items():
        fs[p] = -e  # reduced, so no overlap with the numerator
    return Factorization(1 if r > 0 else -1, dict(sorted(fs.items())))


def valuation(r: RationalLike, p: int) -> int:
    """p-adic valuation of a nonzero rational (p is assumed prime)."""
    r = Q(r)
    if r == 0:
        raise ValueError("valuation of zero is infinite")
    v = 0
    n, d = abs(r.numerator), r.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def squarefree_part(r: RationalLike) -> int:
    """The signed squarefree integer d with r/d a rational square."""
    r = Q(r)
    if r == 0:
        raise ValueError("squarefree part of zero")
    d = 1 if r > 0 else -1
    for p, e in factor(r).factors.items():
        if e % 2:
            d *= p
    return d


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    s = math.isqrt(n)
    return s if s * s == n else None


def sqrt_exact(r: RationalLike) -> Fraction | None:
    """Nonnegative rational square root, or None when r is not a square."""
    r = Q(r)
    a = _isqrt_exact(r.numerator)
    if a is None:
        return None
    b = _isqrt_exact(r.denominator)
    if b is None:
        return None
    return Fraction(a, b)


def is_square(r: RationalLike) -> bool:
    return sqrt_exact(r) is not None


def is_nonzero_square(r: RationalLike) -> bool:
    r = Q(r)
    return r != 0 and is_square(r)


def rationals_by_height(bound: int, *, odd_only: bool = False, nonzero: bool = False) -> Iterator[Fraction]:
    """Every rational of height <= bound, in increasing height, deterministically.

    Within a height, denominators ascend and each positive value is followed
    by its negative.  ``odd_only`` keeps numerator and denominator odd (the
    2-adic units).
    """
    if not nonzero and not odd_only and bound >= 1:
        yield Fraction(0)
    for h in range(1, bound + 1):
        for q in range(1, h + 1):
            ps = range(1, h + 1) if q == h else (h,)
            for p in ps:
                if math.gcd(p, q) != 1 or (odd_only and (p % 2 == 0 or q % 2 == 0)):
                    continue
                yield Fraction(p, q)
                yield Fraction(-p, q)
