"""The non-integers as a 30-good set, and as one polynomial in 32 unknowns.

For t != 0, t is not an integer iff 1/t lies in p Z_(p) for some prime p.
The 2-adic case is a three-squares condition; every odd prime is caught by
some pair (a, b) = (1 + 4u^2, 2v) with u, v 2-adic units, through the sets
J^a_{a,b} and J^{4v}_{a,b} evaluated at 1/t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from . import circuit as C
from .exact import Q, factor, rationals_by_height, valuation
from .goodsets import (
    DEFAULT_WITNESS_HEIGHT,
    GoodFormula,
    Witness,
    _square_check,
    build_Jabc,
    build_Z2unit,
    conj_index,
    exists,
    good_and,
    good_or,
    in_Jabc,
    rename,
    substitute_inverse,
    witness_Jabc,
    witness_Z2unit,
)
from .local import three_squares_witness
from .relcomb import jk_function, jk_witness

DEGREE_CEILING = 6 * 10**11
BOUND_VARS = 30
PHI_OFFSET = 2


@dataclass(frozen=True)
class NotZRepresentation:
    formula: GoodFormula
    provenance: tuple[str, ...]
    parts: tuple[GoodFormula, ...]  # the four conjuncts of the odd-prime family

    @property
    def m(self) -> int:
        return self.formula.m

    def max_ell(self, genuine: bool = True) -> int:
        return self.formula.max_ell(genuine)


def _phi_params() -> tuple[C.Expr, C.Expr, C.Expr]:
    u, v = C.var("u"), C.var("v")
    a = C.esum([1, 4 * u * u])
    return a, 2 * v, 4 * v


def build_notZ() -> NotZRepresentation:
    t, u, v = C.var("t"), C.var("u"), C.var("v")
    h = C.esum([8 * t * t, 7, C.neg(u * u), C.neg(v * v)])
    two_adic = _square_check(h, "2adic")
    a, b, c2 = _phi_params()
    parts = (
        build_Z2unit("u", "U."),
        build_Z2unit("v", "V."),
        substitute_inverse(build_Jabc(a, b, a, "t", "J1."), "t"),
        substitute_inverse(build_Jabc(a, b, c2, "t", "J2."), "t"),
    )
    odd = good_and(*parts)
    F = exists(good_or(two_adic, odd), ["u", "v"])
    F.audit()
    if F.m != BOUND_VARS:
        raise AssertionError(f"variable budget audit: m = {F.m}, expected {BOUND_VARS}")
    prov = tuple(["2-adic"] * len(two_adic.clauses) + ["phi"] * len(odd.clauses))
    return NotZRepresentation(F, prov, parts)


# -- ground truth ----------------------------------------------------------------
def semantic_decide_notZ(t) -> bool:
    """t != 0 and 1/t in 2Z_(2) or in pZ_(p) for an odd prime p."""
    t = Q(t)
    if t == 0:
        return False
    if valuation(t, 2) <= -1:
        return True
    return any(e <= -1 for p, e in factor(t).factors.items() if p != 2)


def _pairs_by_height(bound: int) -> Iterator[tuple[Fraction, Fraction]]:
    units = list(rationals_by_height(bound, odd_only=True))
    heights = [max(abs(x.numerator), x.denominator) for x in units]
    for h in sorted(set(heights)):
        for i, u in enumerate(units):
            for j, v in enumerate(units):
                if max(heights[i], heights[j]) == h:
                    yield u, v


def phi_accepts(t, u, v) -> bool:
    t, u, v = Q(t), Q(u), Q(v)
    a, b = 1 + 4 * u * u, 2 * v
    return in_Jabc(1 / t, a, b, a) and in_Jabc(1 / t, a, b, 4 * v)


def phi_witness_search(t, height_bound: int = 15) -> tuple[Fraction, Fraction] | None:
    """2-adic units u, v, smallest height first, with 1/t in both J-sets."""
    t = Q(t)
    if t == 0 or t.denominator == 1:
        raise ValueError("needs a non-integer t")
    for u, v in _pairs_by_height(height_bound):
        if phi_accepts(t, u, v):
            return u, v
    return None


def notZ_witness(
    t, rep: NotZRepresentation | None = None, phi_height: int = 15, height: int = DEFAULT_WITNESS_HEIGHT
) -> tuple[Witness | None, str]:
    """A clause witness for t, with the route taken or the reason for failure."""
    t = Q(t)
    if not semantic_decide_notZ(t):
        return None, "not-in-set"
    sq = three_squares_witness(8 * t * t + 7)
    if sq is not None:
        u, v, w = sq
        return Witness(0 if w == 0 else 1, {"u": u, "v": v}), "2-adic"
    uv = phi_witness_search(t, phi_height)
    if uv is None:
        return None, "phi-search-exhausted"
    u, v = uv
    a, b = 1 + 4 * u * u, 2 * v
    ws = [
        witness_Z2unit(u, "U."),
        witness_Z2unit(v, "V."),
        witness_Jabc(1 / t, a, b, a, "J1.", height),
        witness_Jabc(1 / t, a, b, 4 * v, "J2.", height),
    ]
    if any(w is None for w in ws):
        return None, "phi-inner-search-exhausted"
    rep = rep or build_notZ()
    idx = PHI_OFFSET + conj_index([w.index for w in ws], rep.parts)
    asg = {"u": u, "v": v}
    for w in ws:
        asg.update(w.assignment)
    return Witness(idx, asg), "phi"


# -- the single polynomial -----------------------------------------------------------
@dataclass(frozen=True)
class ClauseTrace:
    index: int
    provenance: str
    tag: str
    ell: int
    ell_genuine: int
    degree_f: int | float
    degree_gs: tuple
    degree: int | float


@dataclass
class FinalPolynomial:
    dag: C.ExprDAG
    rep: NotZRepresentation
    renaming: dict[str, str]
    trace: list[ClauseTrace]
    degree_bound: int | None = None

    @property
    def bound_variables(self) -> list[str]:
        return sorted(self.dag.variables() - {"t"}, key=lambda s: int(s[1:]))


def combine_to_P(rep: NotZRepresentation) -> FinalPolynomial:
    """prod_s [f_s^2 + (x31 prod g_s - 1)^2 + J_l(genuine g_s, x32)^2].

    g's that are squares by construction (powers with even exponent) only
    need to be nonzero, which the x31 term already enforces, so J sees the
    others only.
    """
    renaming = {old: f"x{i}" for i, old in enumerate(rep.formula.bound, start=1)}
    F = rename(rep.formula, renaming)
    x31, x32 = C.var("x31"), C.var("x32")
    factors, trace = [], []
    for s, cl in enumerate(F.clauses):
        gen = cl.genuine_gs()
        parts = []
        if cl.eqs:
            parts.append(C.square(cl.f))
        parts.append(C.square(C.eprod([x31, *cl.gs]) - 1))
        if gen:
            parts.append(C.square(jk_function(len(gen))(*gen, x32)))
        factor_s = C.esum(parts)
        factors.append(factor_s)
        trace.append(
            ClauseTrace(
                index=s,
                provenance=rep.provenance[s],
                tag=cl.tag,
                ell=cl.ell,
                ell_genuine=len(gen),
                degree_f=C.degree_bound(cl.f),
                degree_gs=tuple(C.degree_bound(g) for g in cl.gs),
                degree=C.degree_bound(factor_s),
            )
        )
    P = C.Expr("mul", tuple(factors))
    bad = [n for n in C._all_nodes(P) if n.op == "const" and isinstance(n.data, Fraction)]
    if bad:
        raise AssertionError("final polynomial has a non-integer constant")
    return FinalPolynomial(C.ExprDAG(P), rep, renaming, trace)


@dataclass(frozen=True)
class DegreeReport:
    bound: int
    per_clause: list[ClauseTrace]
    two_adic_degree: int
    text: str


def certify_degree(fp: FinalPolynomial) -> DegreeReport:
    bound = fp.dag.degree_bound()
    total = sum(tr.degree for tr in fp.trace)
    if total != bound:
        raise AssertionError(f"per-clause degrees sum to {total}, circuit bound {bound}")
    two_adic = sum(tr.degree for tr in fp.trace if tr.provenance == "2-adic")
    worst = max(fp.trace, key=lambda tr: tr.degree)
    by_ell: dict[int, list[ClauseTrace]] = {}
    for tr in fp.trace:
        by_ell.setdefault(tr.ell_genuine, []).append(tr)
    lines = [
        f"clauses: {len(fp.trace)}",
        f"bound variables: {len(fp.bound_variables)}",
        f"degree bound: {bound}",
        f"ceiling: {DEGREE_CEILING}",
        f"2-adic clauses contribute: {two_adic}",
        f"largest clause: #{worst.index} ({worst.provenance}, l={worst.ell_genuine}) degree {worst.degree}",
        "by number of J arguments:",
    ]
    for ell in sorted(by_ell):
        group = by_ell[ell]
        lines.append(
            f"  l={ell:2d}: {len(group):4d} clauses, max degree {max(t.degree for t in group)},"
            f" subtotal {sum(t.degree for t in group)}"
        )
    lines.append("per clause (index provenance l_all l_J deg_f max_deg_g degree):")
    for tr in fp.trace:
        lines.append(
            f"  {tr.index:4d} {tr.provenance:6s} {tr.ell:2d} {tr.ell_genuine:2d}"
            f" {tr.degree_f} {max(tr.degree_gs, default=0)} {tr.degree}"
        )
    text = "\n".join(lines)
    report = DegreeReport(int(bound), fp.trace, int(two_adic), text)
    if bound >= DEGREE_CEILING:
        raise AssertionError(
            f"degree bound {bound} is not below {DEGREE_CEILING}; dominated by clause #{worst.index}"
        )
    return report


def p_witness(fp: FinalPolynomial, t, witness: Witness) -> dict[str, Fraction]:
    """Values for t, x1..x32 making the selected factor vanish."""
    t = Q(t)
    F = fp.rep.formula
    point = F.complete(witness.assignment)
    point["t"] = t
    clause = F.clauses[witness.index]
    gvals = [C.evaluate(g, point) for g in clause.gs]
    gen_vals = [C.evaluate(g, point) for g in clause.genuine_gs()]
    out = {fp.renaming[k]: v for k, v in point.items() if k in fp.renaming}
    out["t"] = t
    prod = math.prod(gvals, start=Fraction(1))
    if prod == 0:
        raise ArithmeticError("selected clause has a vanishing square condition")
    out["x31"] = 1 / prod
    out["x32"] = jk_witness(gen_vals) if gen_vals else Fraction(0)
    return out


def dag_factor_degrees(dag: C.ExprDAG) -> list[int]:
    """Degree bounds of the top-level factors of a product DAG."""
    root = dag.root
    factors = root.args if root.op == "mul" else (root,)
    return [int(C.degree_bound(f)) for f in factors]


def degree_report_from_dag(dag: C.ExprDAG) -> DegreeReport:
    """Accounting for a DAG read back from disk, where no clause trace survives."""
    bound = int(dag.degree_bound())
    degs = dag_factor_degrees(dag)
    if sum(degs) != bound:
        raise AssertionError(f"factor degrees sum to {sum(degs)}, circuit bound {bound}")
    worst = max(range(len(degs)), key=degs.__getitem__)
    lines = [
        f"factors: {len(degs)}",
        f"bound variables: {len(dag.variables() - {'t'})}",
        f"degree bound: {bound}",
        f"ceiling: {DEGREE_CEILING}",
        f"largest factor: #{worst} degree {degs[worst]}",
        "per factor (index degree):",
        *(f"  {i:4d} {d}" for i, d in enumerate(degs)),
    ]
    if bound >= DEGREE_CEILING:
        raise AssertionError(f"degree bound {bound} is not below {DEGREE_CEILING}; dominated by factor #{worst}")
    return DegreeReport(bound, [], 0, "\n".join(lines))


def assemble(cache_dir=None) -> FinalPolynomial:
    """Build rep and P; with a cache directory, reuse a stored DAG for P."""
    from pathlib import Path

    from . import __version__

    rep = build_notZ()
    path = Path(cache_dir) / f"P-{__version__}.dag.json" if cache_dir else None
    if path is not None and path.exists():
        dag = C.ExprDAG.from_json(path.read_text())
        renaming = {old: f"x{i}" for i, old in enumerate(rep.formula.bound, start=1)}
        return FinalPolynomial(dag, rep, renaming, [])
    fp = combine_to_P(rep)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(fp.dag.to_json())
    return fp


def vanishes_at(fp: FinalPolynomial, point) -> bool:
    """Whether P is zero at a rational point.

    Every factor is a sum of squares, so it vanishes iff each squared part
    does; parts are tried in build order, so the J term is evaluated only
    when f and the x31 term are both zero.
    """
    point = {k: Q(v) for k, v in point.items()}
    q = C._probe_modulus(v.denominator for v in point.values())
    memo: dict = {}
    root = fp.dag.root
    for fac in root.args if root.op == "mul" else (root,):
        parts = fac.args if fac.op == "add" else (fac,)
        if all((p.op == "pow" and p.data % 2 == 0) or p.op == "const" for p in parts):
            bases = [p.args[0] if p.op == "pow" else p for p in parts]
        else:
            bases = [fac]
        if not any(C.eval_mod(b, point, q, memo) != 0 or C.evaluate(b, point) != 0 for b in bases):
            return True
    return False
