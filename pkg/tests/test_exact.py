from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diophforge.exact import (
    Factorization,
    FactorizationBudgetExceeded,
    factor,
    factor_budget,
    factor_int,
    format_rational,
    height,
    is_nonzero_square,
    is_prime,
    is_square,
    parse_rational,
    rationals_by_height,
    sqrt_exact,
    squarefree_part,
    valuation,
)

nonzero_q = st.fractions(max_denominator=10**6).filter(lambda r: r != 0)


def test_factor_examples():
    assert factor(1) == Factorization(1, {})
    assert factor(Fraction(-50, 3)) == Factorization(-1, {2: 1, 3: -1, 5: 2})
    assert factor(Fraction(7, 4)).factors == {2: -2, 7: 1}
    with pytest.raises(ValueError):
        factor(0)


def test_valuation_examples():
    assert valuation(Fraction(50, 3), 5) == 2
    assert valuation(Fraction(7, 4), 2) == -2
    assert valuation(Fraction(4, 7), 2) == 2
    assert valuation(1, 13) == 0


def test_square_examples():
    assert is_square(Fraction(4, 9)) and not is_square(-1) and not is_square(2)
    assert sqrt_exact(Fraction(4, 9)) == Fraction(2, 3)
    assert sqrt_exact(0) == 0 and sqrt_exact(3) is None
    assert is_square(0) and not is_nonzero_square(0)


def test_squarefree_and_height():
    assert squarefree_part(50) == 2
    assert squarefree_part(Fraction(-4, 9)) == -1
    assert squarefree_part(1) == 1
    assert squarefree_part(Fraction(1, 12)) == 3
    assert height(0) == 1 and height(Fraction(-7, 4)) == 7 and height(Fraction(3, 100)) == 100


def test_parse_format_roundtrip():
    for s in ("0", "-7/4", "12", "3/100"):
        assert format_rational(parse_rational(s)) == s
    assert parse_rational(" 6/-4 ") == Fraction(-3, 2)
    with pytest.raises(ValueError):
        parse_rational("1.5")


def test_primes_and_large_factorization():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    p, q = 1_000_003, 998_244_353
    assert factor_int(p * q * q) == {p: 1, q: 2}
    assert is_prime(2**61 - 1) and not is_prime(3215031751)  # strong pseudoprime to 2, 3, 5, 7


def test_factor_budget_is_a_clean_error():
    n = 1_000_000_007 * 998_244_353
    with pytest.raises(FactorizationBudgetExceeded):
        with factor_budget(1):
            factor_int(n)
    assert factor_int(n) == {998_244_353: 1, 1_000_000_007: 1}


def test_factorization_json():
    f = factor(Fraction(-50, 3))
    assert Factorization.from_json(f.to_json()) == f
    with pytest.raises(ValueError):
        Factorization.from_json('{"sign": 2, "factors": {}}')


def test_rationals_by_height_order():
    vals = list(rationals_by_height(3))
    assert vals[0] == 0
    assert [height(v) for v in vals] == sorted(height(v) for v in vals)
    assert len(vals) == len(set(vals)) == 1 + 2 * (1 + 2 + 4)
    odd = list(rationals_by_height(5, odd_only=True))
    assert all(v.numerator % 2 and v.denominator % 2 for v in odd)
    assert len(list(rationals_by_height(40))) == 1959


@settings(max_examples=200, deadline=None)
@given(nonzero_q)
def test_factor_roundtrip(r):
    assert factor(r).value() == r


@settings(max_examples=200, deadline=None)
@given(nonzero_q, nonzero_q, st.sampled_from([2, 3, 5, 7, 11]))
def test_valuation_additive(r, s, p):
    assert valuation(r * s, p) == valuation(r, p) + valuation(s, p)
    assert valuation(1 / r, p) == -valuation(r, p)


@settings(max_examples=200, deadline=None)
@given(st.fractions(max_denominator=10**5))
def test_square_characterisations(r):
    assert is_square(r) == (sqrt_exact(r) is not None) == (r == 0 or squarefree_part(r) == 1)
    assert is_square(r * r)
