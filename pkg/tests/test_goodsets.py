import json
import random
from fractions import Fraction

import pytest

from diophforge import circuit as C
from diophforge.goodsets import (
    BUDGETS,
    TAGS,
    GoodFormula,
    LocalSetDescriptor,
    build_Jabc,
    build_Sab,
    build_SqTabUnit,
    build_Tab,
    build_TabUnit,
    build_Z2,
    build_Z2unit,
    formula_truth,
    good_and,
    good_or,
    in_Jabc,
    in_Sab,
    in_SqTabUnit,
    in_Tab,
    in_TabUnit,
    sab_bruteforce,
    solve_conic,
    substitute_inverse,
    witness_Jabc,
    witness_SqTabUnit,
    witness_Tab,
    witness_Z2,
)


def test_budgets():
    ms = [LocalSetDescriptor(t, 5, 2, 5).build().m for t in TAGS]
    assert ms == [2, 2, 2, 5, 5, 6, 12] == [BUDGETS[t] for t in TAGS]


def test_combinators():
    Z, T = build_Z2("t", "z."), build_Tab(5, 2, "t", "T.")
    both = good_and(Z, T)
    assert both.m == 7 and len(both.clauses) == len(Z.clauses) * len(T.clauses)
    either = good_or(Z, build_Z2("t", "z."))
    assert either.m == 2  # shared names are counted once


def test_z2_example():
    F = build_Z2()
    w = witness_Z2(3)
    assert w.assignment == {"x": 8, "y": 1} and F.check(w, {"t": 3})
    assert witness_Z2(Fraction(1, 2)) is None


def test_substitute_inverse():
    F = substitute_inverse(build_Z2(), "t")
    w = witness_Z2(Fraction(1, 3))
    assert F.check(w, {"t": 3})
    assert witness_Z2(Fraction(1, 2)) is None  # 1/2 is not 2-integral


def test_sab():
    assert in_Sab(100, 1, 1)
    assert build_Sab(5, 2).m == 2
    rng = random.Random(3)
    for _ in range(40):
        r = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        a, b = rng.choice([(5, 2), (3, 7), (Fraction(1, 3), -2)])
        if sab_bruteforce(r, a, b, height=6) is not None:
            assert in_Sab(r, a, b)


def test_tab_examples():
    assert not in_Tab(Fraction(1, 5), 5, 2)
    assert in_Tab(3, 5, 2)
    F = build_Tab(5, 2)
    w = witness_Tab(3, 5, 2)
    assert w is not None and F.check(w, {"t": 3})
    assert witness_Tab(Fraction(1, 5), 5, 2, height=6, guided=False) is None


def test_tabunit_examples():
    assert in_TabUnit(3, 5, 2) and not in_TabUnit(5, 5, 2)
    assert all(in_TabUnit(t, 1, 1) for t in (Fraction(1, 7), 2, -9))
    assert build_TabUnit(5, 2).m == 5


def test_sqtabunit_examples():
    assert in_SqTabUnit(0, 5, 2) and in_SqTabUnit(Fraction(25, 4), 5, 2)
    assert not in_SqTabUnit(5, 5, 2)
    F = build_SqTabUnit(5, 2, "t")
    w = witness_SqTabUnit(Fraction(25, 4), 5, 2)
    assert F.check(w, {"t": Fraction(25, 4)})


def test_jabc_examples():
    assert in_Jabc(5, 5, 2, 5) and not in_Jabc(Fraction(1, 5), 5, 2, 5)
    assert in_Jabc(0, 5, 2, 5)
    assert all(in_Jabc(t, 1, 1, 7) for t in (Fraction(1, 7), 3))
    F = build_Jabc(5, 2, 5)
    w = witness_Jabc(5, 5, 2, 5)
    assert F.check(w, {"t": 5})


def test_formula_truth_verdicts():
    assert formula_truth(build_Z2(), 3, LocalSetDescriptor("Z2")).verdict == "true-with-witness"
    d = LocalSetDescriptor("Jabc", 5, 2, 5)
    assert formula_truth(d.build(), Fraction(1, 5), d).verdict == "false-by-oracle"
    T = LocalSetDescriptor("Tab", 5, 2)
    assert formula_truth(T.build(), Fraction(10**9 + 7, 3), T, height_bound=0).verdict == "true-by-oracle"


def test_parameter_validation():
    with pytest.raises(ValueError):
        build_Tab(-1, -2)
    with pytest.raises(ValueError):
        LocalSetDescriptor("Jabc", 5, 2, 0)
    with pytest.raises(ValueError):
        LocalSetDescriptor("nope")


def test_tabunit_is_tab_of_t_plus_inverse():
    rng = random.Random(32)
    for _ in range(100):
        t = Fraction(rng.randint(-40, 40) or 1, rng.randint(1, 40))
        a, b = rng.choice([(5, 2), (3, 7), (-1, 6)])
        assert in_TabUnit(t, a, b) == in_Tab(t + 1 / t, a, b)


def test_conic_solver():
    rng = random.Random(9)
    for _ in range(300):
        a = Fraction(rng.randint(-12, 12) or 1, rng.randint(1, 5))
        b = Fraction(rng.randint(-12, 12) or 1, rng.randint(1, 5))
        K = Fraction(rng.randint(-20, 20) or 1, rng.randint(1, 6))
        sol = solve_conic(a, b, K)
        if sol is not None:
            X, Y = sol
            assert a * X * X + b * Y * Y == K


def test_formula_json_roundtrip():
    F = build_Tab(5, 2)
    back = GoodFormula.from_json(F.to_json())
    assert back.m == F.m and len(back.clauses) == len(F.clauses)
    w = witness_Tab(3, 5, 2)
    # clause indices and variable names survive the round trip
    assert back.check(w, {"t": 3})
    obj = json.loads(build_Z2().to_json(form="dag"))
    assert obj["form"] == "dag" and GoodFormula.from_obj(obj).m == 2


def test_genuine_square_conditions():
    F = build_Jabc(5, 2, 5)
    assert F.max_ell(genuine=True) <= F.max_ell()
    for cl in F.clauses:
        for g in cl.gs:
            if g not in cl.genuine_gs():
                assert C.is_square_form(g)
