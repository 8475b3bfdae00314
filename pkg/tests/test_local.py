from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import hilbert_bruteforce
from diophforge.local import (
    INF,
    candidate_primes,
    delta_set,
    four_squares_witness,
    hilbert,
    in_Zp,
    in_Zp_unit,
    is_local_square,
    legendre,
    lemma31_decide,
    multiplicative_independent,
    three_squares_integer,
    three_squares_rational,
    three_squares_witness,
    two_squares,
)

nonzero_q = st.builds(
    lambda n, d, neg: Fraction(-n if neg else n, d), st.integers(1, 60), st.integers(1, 60), st.booleans()
)


def test_legendre_examples():
    assert legendre(2, 5) == -1 and legendre(4, 7) == 1 and legendre(10, 5) == 0
    with pytest.raises(ValueError):
        legendre(3, 2)


def test_hilbert_examples():
    assert hilbert(5, 2, 5) == -1
    assert hilbert(5, 2, 2) == -1
    assert all(hilbert(1, b, v) == 1 for b in (2, -3, Fraction(5, 7)) for v in (INF, 2, 3, 5, 7))
    assert hilbert(-1, -1, INF) == -1
    with pytest.raises(ValueError):
        hilbert(0, 2, 3)
    with pytest.raises(ValueError):
        hilbert(2, 3, 4)


def test_delta_examples():
    assert delta_set(5, 2) == (2, 5)
    assert delta_set(1, 7) == ()
    assert delta_set(-1, -1) == (2,)
    assert hilbert_bruteforce(-1, -1, 2) == -1 and hilbert_bruteforce(-1, -1, 3) == 1


def test_zp_examples():
    assert not in_Zp(Fraction(3, 5), 5)
    assert in_Zp(10, 5) and not in_Zp_unit(10, 5)
    assert in_Zp_unit(3, 5) and in_Zp(3 + Fraction(1, 3), 5)
    assert in_Zp(0, 7) and not in_Zp_unit(0, 7)


def test_three_squares_examples():
    assert three_squares_integer(9) and not three_squares_integer(15) and three_squares_integer(0)
    assert not three_squares_integer(28) and not three_squares_integer(-1)
    assert not three_squares_rational(Fraction(15, 4))
    assert three_squares_rational(9) and not three_squares_rational(-1)
    assert not lemma31_decide(Fraction(1, 2)) and lemma31_decide(1) and lemma31_decide(0)


def test_witness_examples():
    w = three_squares_witness(9)
    assert sum(x * x for x in w) == 9
    assert three_squares_witness(Fraction(15, 4)) is None
    assert three_squares_witness(0) == (0, 0, 0)
    w4 = four_squares_witness(7)
    assert sorted(w4) == [1, 1, 1, 2]
    assert four_squares_witness(0) == (0, 0, 0, 0)
    assert four_squares_witness(-3) is None


def test_two_squares():
    assert two_squares(3) is None
    for n in (0, 1, 2, 25, 65, 5**3 * 13 * 9, 2**7):
        a, b = two_squares(n)
        assert a * a + b * b == n


def test_local_squares():
    assert is_local_square(17, 2) and not is_local_square(5, 2)
    assert is_local_square(Fraction(4, 9), 3) and not is_local_square(3, 3)
    assert is_local_square(2, 7) and not is_local_square(3, 7)
    assert not is_local_square(-1, INF)


def test_independence_examples():
    assert multiplicative_independent([2, 3, 5])
    assert not multiplicative_independent([2, 3, 6])
    assert not multiplicative_independent([4])
    assert multiplicative_independent([-1, 2]) and not multiplicative_independent([-1, -4])
    with pytest.raises(ValueError):
        multiplicative_independent([0, 2])


@settings(max_examples=150, deadline=None)
@given(nonzero_q, nonzero_q)
def test_product_formula_and_symmetry(a, b):
    prod = hilbert(a, b, INF)
    for p in candidate_primes(a, b):
        prod *= hilbert(a, b, p)
        assert hilbert(a, b, p) == hilbert(b, a, p)
    assert prod == 1


@settings(max_examples=100, deadline=None)
@given(nonzero_q, nonzero_q, nonzero_q, st.sampled_from([INF, 2, 3, 5, 7]))
def test_square_classes(a, b, c, v):
    assert hilbert(a * c * c, b, v) == hilbert(a, b, v)
    # bilinearity in the first slot
    assert hilbert(a * c, b, v) == hilbert(a, b, v) * hilbert(c, b, v)


@settings(max_examples=200, deadline=None)
@given(st.fractions(max_denominator=10**4).filter(lambda r: r >= 0))
def test_three_square_witness_recombines(r):
    w = three_squares_witness(r)
    assert (w is not None) == three_squares_rational(r)
    if w is not None:
        assert sum(x * x for x in w) == r
    assert sum(x * x for x in four_squares_witness(r)) == r


def test_witnesses_for_large_and_highly_even_inputs():
    for r in (
        Fraction(3061383713395480924150272715520999424, 125),
        Fraction(4**60 * 3),
        Fraction(10**40 + 1, 7),
        Fraction(2**39),
    ):
        assert sum(x * x for x in four_squares_witness(r)) == r
        w = three_squares_witness(r)
        assert (w is not None) == three_squares_rational(r)
        if w is not None:
            assert sum(x * x for x in w) == r
