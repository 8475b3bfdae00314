import random
from fractions import Fraction

import pytest

from diophforge import circuit as C
from diophforge.assembly import (
    DEGREE_CEILING,
    build_notZ,
    certify_degree,
    combine_to_P,
    dag_factor_degrees,
    degree_report_from_dag,
    notZ_witness,
    p_witness,
    phi_accepts,
    phi_witness_search,
    semantic_decide_notZ,
    vanishes_at,
)


@pytest.fixture(scope="module")
def rep():
    return build_notZ()


@pytest.fixture(scope="module")
def fp(rep):
    return combine_to_P(rep)


def test_representation_shape(rep):
    assert rep.m == 30
    assert set(rep.provenance) == {"2-adic", "phi"}
    assert rep.provenance.count("2-adic") == 2
    assert rep.max_ell() == 10
    assert [p.m for p in rep.parts] == [2, 2, 12, 12]


def test_semantic_examples():
    assert semantic_decide_notZ(Fraction(1, 2))
    assert not semantic_decide_notZ(3)
    assert semantic_decide_notZ(Fraction(22, 7))
    assert not semantic_decide_notZ(0)


def test_phi_search_examples():
    u, v = phi_witness_search(Fraction(1, 5), 15)
    assert u.numerator % 2 and u.denominator % 2 and v.numerator % 2 and v.denominator % 2
    assert phi_accepts(Fraction(1, 5), u, v)
    with pytest.raises(ValueError):
        phi_witness_search(3)


def test_disjunct_completeness_small_heights(rep):
    """Every non-integer t of height <= 12 is covered by one of the two routes."""
    for d in range(2, 13):
        for n in range(-12, 13):
            t = Fraction(n, d)
            if t.denominator == 1:
                continue
            w, route = notZ_witness(t, rep, phi_height=13)
            assert w is not None, (t, route)


def test_polynomial_shape(fp):
    names = fp.dag.variables()
    assert names == {"t"} | {f"x{i}" for i in range(1, 33)}
    assert len(fp.bound_variables) == 32


def test_degree_certificate(fp):
    rep = certify_degree(fp)
    assert rep.bound == 167_456_544 < DEGREE_CEILING
    assert rep.two_adic_degree <= 300
    assert "largest clause" in rep.text
    degs = dag_factor_degrees(fp.dag)
    assert sum(degs) == rep.bound
    # dropping a factor never raises the bound
    assert all(rep.bound - d <= rep.bound for d in degs)


def test_degree_report_after_roundtrip(fp):
    back = C.ExprDAG.from_json(fp.dag.to_json())
    assert degree_report_from_dag(back).bound == certify_degree(fp).bound


@pytest.mark.parametrize("t", [Fraction(1, 2), Fraction(3, 4), Fraction(1, 5), Fraction(2, 3)])
def test_end_to_end_zero(rep, fp, t):
    w, route = notZ_witness(t, rep)
    assert w is not None
    vec = p_witness(fp, t, w)
    assert C.evaluate(fp.dag.root, vec) == 0
    assert vanishes_at(fp, vec)
    # the same vector at a different t is not a zero
    assert not vanishes_at(fp, dict(vec, t=t + 1))


def test_integer_t_random_vectors_nonzero(fp):
    rng = random.Random(20)
    for _ in range(100):
        pt = {"t": Fraction(3)}
        pt.update({f"x{i}": Fraction(rng.randint(-20, 20), rng.randint(1, 20)) for i in range(1, 33)})
        assert not vanishes_at(fp, pt)


def test_vanishes_agrees_with_full_evaluation(fp):
    rng = random.Random(21)
    pt = {"t": Fraction(5, 3)}
    pt.update({f"x{i}": Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for i in range(1, 33)})
    assert vanishes_at(fp, pt) == fp.dag.is_zero_at(pt)
