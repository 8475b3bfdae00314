"""m-good formulas and the local sets they describe.

A good formula is a disjunction of clauses over a free subject variable and
m bound variables; a clause holds when its equations vanish and each of its
``gs`` is a nonzero rational square.  Equations are kept as a list of
components whose squares sum to the clause polynomial ``f``, so nested
conjunctions square once instead of at every level.

Every set comes in three parts: a constructor for its formula, a semantic
oracle built from valuations and Hilbert symbols, and a witness builder
that produces a clause index plus values for the bound variables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Sequence

from sympy import symbols
from sympy.solvers.diophantine.diophantine import diop_ternary_quadratic_normal

from . import circuit as C
from .circuit import Expr
from .exact import (
    FactorizationBudgetExceeded,
    Q,
    is_nonzero_square,
    rationals_by_height,
    sqrt_exact,
    squarefree_part,
    valuation,
)
from .local import (
    INF,
    candidate_primes,
    delta_set,
    hilbert,
    in_Zp,
    in_Zp_unit,
    is_local_square,
    three_squares_witness,
)
from .poly import PolyParseError, SparsePoly, TermBudgetExceeded

DEFAULT_WITNESS_HEIGHT = 40


# -- the formula algebra -------------------------------------------------------
@dataclass(frozen=True)
class Clause:
    eqs: tuple[Expr, ...] = ()
    gs: tuple[Expr, ...] = ()
    tag: str = ""

    @property
    def f(self) -> Expr:
        if len(self.eqs) == 1:
            return self.eqs[0]
        return C.sum_of_squares(self.eqs)

    @property
    def ell(self) -> int:
        return len(self.gs)

    def genuine_gs(self) -> tuple[Expr, ...]:
        """The g's that are not squares by construction."""
        return tuple(g for g in self.gs if not C.is_square_form(g))

    def holds(self, point: Mapping[str, Fraction]) -> bool:
        if any(C.evaluate(e, point) != 0 for e in self.eqs):
            return False
        return all(is_nonzero_square(C.evaluate(g, point)) for g in self.gs)


@dataclass(frozen=True)
class GoodFormula:
    clauses: tuple[Clause, ...]
    bound: tuple[str, ...] = ()

    @property
    def m(self) -> int:
        return len(self.bound)

    @property
    def free(self) -> tuple[str, ...]:
        names: set[str] = set()
        for c in self.clauses:
            for e in c.eqs + c.gs:
                names |= C.free_vars(e)
        return tuple(sorted(names - set(self.bound)))

    def used(self) -> set[str]:
        names: set[str] = set()
        for c in self.clauses:
            for e in c.eqs + c.gs:
                names |= C.free_vars(e)
        return names

    def audit(self) -> None:
        """Declared bound variables are exactly the bound ones in use."""
        unused = set(self.bound) - self.used()
        if unused:
            raise ValueError(f"bound variables never used: {sorted(unused)}")
        if len(set(self.bound)) != len(self.bound):
            raise ValueError("repeated bound variable")

    def max_ell(self, genuine: bool = False) -> int:
        if genuine:
            return max((len(c.genuine_gs()) for c in self.clauses), default=0)
        return max((c.ell for c in self.clauses), default=0)

    def complete(self, assignment: Mapping[str, Fraction]) -> dict[str, Fraction]:
        """Fill unassigned bound variables with 0."""
        out = {v: Fraction(0) for v in self.bound}
        out.update({k: Q(v) for k, v in assignment.items()})
        return out

    def check(self, witness: "Witness", free_values: Mapping[str, object]) -> bool:
        point = self.complete(witness.assignment)
        point.update({k: Q(v) for k, v in free_values.items()})
        return self.clauses[witness.index].holds(point)

    # JSON form
    def to_obj(self, form: str = "poly") -> dict:
        def enc(e: Expr):
            if form == "poly":
                return C.expand(e).to_obj()
            return C.ExprDAG(e).to_obj()

        return {
            "m": self.m,
            "free": list(self.free),
            "bound": list(self.bound),
            "form": form,
            "clauses": [
                {"f": enc(c.f), "gs": [enc(g) for g in c.gs], "tag": c.tag} for c in self.clauses
            ],
        }

    def to_json(self, form: str = "poly") -> str:
        return json.dumps(self.to_obj(form))

    @classmethod
    def from_obj(cls, obj) -> "GoodFormula":
        try:
            form = obj.get("form", "poly")
            dec = (lambda o: C.from_poly(SparsePoly.from_obj(o))) if form == "poly" else (
                lambda o: C.ExprDAG.from_obj(o).root
            )
            clauses = tuple(
                Clause((dec(c["f"]),), tuple(dec(g) for g in c["gs"]), c.get("tag", ""))
                for c in obj["clauses"]
            )
            F = cls(clauses, tuple(obj.get("bound", ())))
        except (KeyError, TypeError, AttributeError) as exc:
            raise PolyParseError(f"malformed formula: {exc}", "$") from None
        if F.m != obj["m"]:
            raise PolyParseError("declared m does not match the bound variables", "$.m")
        return F

    @classmethod
    def from_json(cls, text: str) -> "GoodFormula":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolyParseError(exc.msg, exc.pos) from None
        return cls.from_obj(obj)


@dataclass(frozen=True)
class Witness:
    index: int
    assignment: dict = field(default_factory=dict)


TRUE = GoodFormula((Clause(),))


def _merge_eqs(parts: Iterable[Clause]) -> tuple[Expr, ...]:
    return tuple(e for c in parts for e in c.eqs if e is not C.ZERO)


def good_and(*formulas: GoodFormula) -> GoodFormula:
    """Intersection: distribute clauses, pool equations and square conditions."""
    bound: list[str] = []
    for F in formulas:
        clash = set(bound) & set(F.bound)
        if clash:
            raise ValueError(f"bound variables not apart: {sorted(clash)}")
        bound.extend(F.bound)
    for F in formulas:
        captured = set(F.free) & (set(bound) - set(F.bound))
        if captured:
            raise ValueError(f"free variables would be captured: {sorted(captured)}")
    clauses = []
    for combo in product(*(F.clauses for F in formulas)):
        clauses.append(
            Clause(
                _merge_eqs(combo),
                tuple(g for c in combo for g in c.gs),
                "&".join(c.tag for c in combo if c.tag),
            )
        )
    return GoodFormula(tuple(clauses), tuple(bound))


def good_or(*formulas: GoodFormula) -> GoodFormula:
    """Union; bound variables may be shared between disjuncts."""
    bound: list[str] = []
    for F in formulas:
        bound.extend(v for v in F.bound if v not in bound)
    return GoodFormula(tuple(c for F in formulas for c in F.clauses), tuple(bound))


def conj_index(indices: Sequence[int], formulas: Sequence[GoodFormula]) -> int:
    idx = 0
    for i, F in zip(indices, formulas):
        idx = idx * len(F.clauses) + i
    return idx


def exists(F: GoodFormula, names: Sequence[str]) -> GoodFormula:
    missing = set(names) - set(F.free)
    if missing:
        raise ValueError(f"cannot bind {sorted(missing)}: not free")
    return GoodFormula(F.clauses, tuple(names) + F.bound)


def substitute(F: GoodFormula, mapping: Mapping[str, object]) -> GoodFormula:
    """Polynomial substitution into the free variables."""
    if set(mapping) & set(F.bound):
        raise ValueError("cannot substitute for bound variables")
    return GoodFormula(
        tuple(
            Clause(
                tuple(C.substitute(e, mapping) for e in c.eqs),
                tuple(C.substitute(g, mapping) for g in c.gs),
                c.tag,
            )
            for c in F.clauses
        ),
        F.bound,
    )


def rename(F: GoodFormula, mapping: Mapping[str, str]) -> GoodFormula:
    images = {k: C.var(v) for k, v in mapping.items()}
    return GoodFormula(
        tuple(
            Clause(
                tuple(C.substitute(e, images) for e in c.eqs),
                tuple(C.substitute(g, images) for g in c.gs),
                c.tag,
            )
            for c in F.clauses
        ),
        tuple(mapping.get(v, v) for v in F.bound),
    )


def substitute_rational(F: GoodFormula, name: str, num, den) -> GoodFormula:
    """F with ``name`` replaced by num/den, cleared to polynomials.

    Equations are multiplied by den^deg, square conditions by an even power
    of den, and den^2 joins every clause as a square condition so that the
    rewrite is only used where den is nonzero.
    """
    num, den = C.lift(num), C.lift(den)
    if den is C.ZERO:
        raise ZeroDivisionError("denominator is zero")
    guard = () if den.op == "const" else (C.square(den),)
    clauses = []
    for c in F.clauses:
        eqs = tuple(C.clear_substitute(e, name, num, den)[0] for e in c.eqs)
        gs = []
        for g in c.gs:
            E, d = C.clear_substitute(g, name, num, den)
            gs.append(C.eprod([E, den]) if d % 2 else E)
        clauses.append(Clause(eqs, tuple(gs) + guard, c.tag))
    return GoodFormula(tuple(clauses), F.bound)


def substitute_inverse(F: GoodFormula, name: str = "t") -> GoodFormula:
    """The formula for F(1/t), meaningful at t != 0 (guarded by t^2)."""
    return substitute_rational(F, name, C.ONE, C.var(name))


# -- parameters ----------------------------------------------------------------
def _param(x) -> Expr:
    return C.lift(x) if not isinstance(x, Expr) else x


def _numeric(x) -> Fraction | None:
    e = _param(x)
    return Fraction(e.data) if e.op == "const" else None


def _check_ab(a, b) -> None:
    na, nb = _numeric(a), _numeric(b)
    if na is not None and na == 0 or nb is not None and nb == 0:
        raise ValueError("a and b must be nonzero")
    if na is not None and nb is not None and na <= 0 and nb <= 0:
        raise ValueError("need a > 0 or b > 0")


def _square_check(h: Expr, tag: str) -> GoodFormula:
    """h in the squares, split as (h = 0) or (h a nonzero square)."""
    return GoodFormula((Clause((h,), (), tag + "=0"), Clause((), (h,), tag + "*")))


# -- constructors ----------------------------------------------------------------
def build_Z2(subject: str = "t", prefix: str = "") -> GoodFormula:
    """t in Z_(2) iff 7t^2 + 2 - x^2 - y^2 is a square."""
    t, x, y = C.var(subject), C.var(prefix + "x"), C.var(prefix + "y")
    h = C.esum([7 * t * t, 2, C.neg(x * x), C.neg(y * y)])
    return exists(_square_check(h, "Z2"), [prefix + "x", prefix + "y"])


def build_Z2unit(subject: str = "t", prefix: str = "") -> GoodFormula:
    t = C.var(subject)
    return substitute_rational(build_Z2(subject, prefix), subject, t * t + 1, t)


def build_Sab(a, b, subject: str = "r", prefix: str = "") -> GoodFormula:
    """r in S_ab iff ab(4 - r^2 + a x^2 + b y^2) is a square."""
    _check_ab(a, b)
    a, b = _param(a), _param(b)
    r, x, y = C.var(subject), C.var(prefix + "x"), C.var(prefix + "y")
    scale = C.ONE
    na, nb = _numeric(a), _numeric(b)
    if na is not None and nb is not None:
        # clears rational parameters while keeping both verdicts
        scale = C.const((na.denominator * nb.denominator) ** 2)
    inner = C.esum([4, C.neg(r * r), a * x * x, b * y * y])
    h = C.eprod([scale, a, b, inner])
    return exists(_square_check(h, "S"), [prefix + "x", prefix + "y"])


def build_Tab(a, b, subject: str = "t", prefix: str = "") -> GoodFormula:
    """t in T_ab iff some r has r and t - r in S_ab."""
    r = prefix + "r"
    S1 = build_Sab(a, b, subject=r, prefix=prefix + "S1.")
    hole = prefix + "S2.subj"
    S2 = substitute(build_Sab(a, b, subject=hole, prefix=prefix + "S2."), {hole: C.var(subject) - C.var(r)})
    return exists(good_and(S1, S2), [r])


def build_TabUnit(a, b, subject: str = "t", prefix: str = "") -> GoodFormula:
    """t != 0 and t + 1/t in T_ab."""
    t = C.var(subject)
    return substitute_rational(build_Tab(a, b, subject, prefix), subject, t * t + 1, t)


def build_SqTabUnit(a, b, subject: str = "x", prefix: str = "") -> GoodFormula:
    """x = 0 or x y^2 in T_ab^x for some y."""
    x, y = C.var(subject), C.var(prefix + "y")
    hole = prefix + "TU.subj"
    unit = substitute(build_TabUnit(a, b, hole, prefix + "TU."), {hole: x * y * y})
    zero = GoodFormula((Clause((x,), (), "x=0"),))
    return good_or(zero, exists(unit, [prefix + "y"]))


def build_Jabc(a, b, c, subject: str = "t", prefix: str = "") -> GoodFormula:
    """t = 0 or, for some y != 0, t/(c y^2) in T_ab and 1 - c y^2 in sq T_ab^x."""
    _check_ab(a, b)
    c = _param(c)
    if _numeric(c) == 0:
        raise ValueError("c must be nonzero")
    t, y = C.var(subject), C.var(prefix + "y")
    cy2 = C.eprod([c, y, y])
    hole_t = prefix + "T.subj"
    T = substitute_rational(build_Tab(a, b, hole_t, prefix + "T."), hole_t, t, cy2)
    hole_q = prefix + "Q.subj"
    Qf = substitute(build_SqTabUnit(a, b, hole_q, prefix + "Q."), {hole_q: 1 - cy2})
    zero = GoodFormula((Clause((t,), (), "t=0"),))
    return good_or(zero, exists(good_and(T, Qf), [prefix + "y"]))


# -- semantic oracles ----------------------------------------------------------
def in_Z2(t) -> bool:
    return in_Zp(t, 2)


def in_Z2unit(t) -> bool:
    return in_Zp_unit(t, 2)


def _quaternary_anisotropic(coeffs: Sequence[Fraction], v) -> bool:
    if v == INF:
        return all(c > 0 for c in coeffs) or all(c < 0 for c in coeffs)
    d = math.prod(coeffs)
    if not is_local_square(d, v):
        return False
    eps = 1
    for i in range(4):
        for j in range(i + 1, 4):
            eps *= hilbert(coeffs[i], coeffs[j], v)
    return eps == -hilbert(-1, -1, v)


def in_Sab(r, a, b) -> bool:
    """Whether (r/2)^2 - 1 is represented by <a, b, -ab> over Q."""
    r, a, b = Q(r), Q(a), Q(b)
    q = (r / 2) ** 2 - 1
    if q == 0:
        return True
    coeffs = (a, b, -a * b, -q)
    return not any(
        _quaternary_anisotropic(coeffs, v) for v in [INF] + candidate_primes(a, b, q)
    )


def in_Tab(t, a, b) -> bool:
    t = Q(t)
    return t == 0 or all(valuation(t, p) >= 0 for p in delta_set(a, b))


def in_TabUnit(t, a, b) -> bool:
    t = Q(t)
    return t != 0 and all(valuation(t, p) == 0 for p in delta_set(a, b))


def in_SqTabUnit(x, a, b) -> bool:
    x = Q(x)
    return x == 0 or all(valuation(x, p) % 2 == 0 for p in delta_set(a, b))


def in_Jabc(t, a, b, c) -> bool:
    t, c = Q(t), Q(c)
    if t == 0:
        return True
    return all(valuation(t, p) >= 1 for p in delta_set(a, b) if valuation(c, p) % 2)


# -- witnesses -----------------------------------------------------------------
def solve_conic(a, b, K) -> tuple[Fraction, Fraction] | None:
    """Rational (X, Y) with a X^2 + b Y^2 = K, or None when there is none."""
    a, b, K = Q(a), Q(b), Q(K)
    if K == 0:
        return Fraction(0), Fraction(0)
    m = sqrt_exact(-a / b)
    if m is not None:
        # b = -a/m^2, so the left side is a (X - Y/m)(X + Y/m)
        s = K / a
        return (1 + s) / 2, m * (s - 1) / 2
    for v in [INF] + candidate_primes(a, b, K):
        if hilbert(a / K, b / K, v) == -1:
            return None
    L = math.lcm(a.denominator, b.denominator, K.denominator)
    sol = _ternary_zero(int(a * L), int(b * L), -int(K * L))
    if sol is None or sol[2] == 0:
        raise ArithmeticError(f"conic {a}X^2 + {b}Y^2 = {K} is locally solvable but unsolved")
    x, y, z = sol
    out = x / z, y / z
    if a * out[0] ** 2 + b * out[1] ** 2 != K:
        raise ArithmeticError("conic solution failed the exact check")
    return out


def _ternary_zero(a: int, b: int, c: int) -> tuple[Fraction, Fraction, Fraction] | None:
    """Nontrivial rational zero of a x^2 + b y^2 + c z^2, via Legendre normal form.

    The solver wants squarefree, pairwise coprime coefficients; square
    factors are absorbed into the variables and a common factor g of two
    coefficients moves onto the third variable.
    """
    coeffs = [a, b, c]
    scale = [Fraction(1)] * 3
    g = math.gcd(*coeffs)
    coeffs = [k // g for k in coeffs]
    for i, k in enumerate(coeffs):
        sf = squarefree_part(k)
        scale[i] /= math.isqrt(k // sf)
        coeffs[i] = sf
    changed = True
    while changed:
        changed = False
        for i, j, l in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            g = math.gcd(coeffs[i], coeffs[j])
            if g > 1:
                coeffs[i] //= g
                coeffs[j] //= g
                coeffs[l] *= g
                scale[l] *= g
                changed = True
    X, Y, Z = symbols("X Y Z", integer=True)
    sol = diop_ternary_quadratic_normal(coeffs[0] * X**2 + coeffs[1] * Y**2 + coeffs[2] * Z**2)
    if sol[0] is None:
        return None
    out = tuple(int(v) * m for v, m in zip(sol, scale))
    if a * out[0] ** 2 + b * out[1] ** 2 + c * out[2] ** 2 != 0 or not any(out):
        raise ArithmeticError("ternary solution failed the exact check")
    return out


def witness_Z2(t, prefix: str = "") -> Witness | None:
    t = Q(t)
    sq = three_squares_witness(7 * t * t + 2)
    if sq is None:
        return None
    x, y, z = sq
    return Witness(0 if z == 0 else 1, {prefix + "x": x, prefix + "y": y})


def witness_Z2unit(t, prefix: str = "") -> Witness | None:
    t = Q(t)
    if t == 0:
        return None
    return witness_Z2(t + 1 / t, prefix)


def witness_Sab(
    r, a, b, prefix: str = "", height: int = DEFAULT_WITNESS_HEIGHT, guided: bool = True
) -> Witness | None:
    """Search the last quaternary coordinate by height; solve a conic for the rest.

    Unguided searches skip the membership oracle of the set being searched,
    so a hit is evidence independent of that oracle.
    """
    r, a, b = Q(r), Q(a), Q(b)
    q = (r / 2) ** 2 - 1
    if guided and q != 0 and not in_Sab(r, a, b):
        return None
    scale_primes = candidate_primes(a, b)
    # aX^2 + bY^2 = K is locally solvable at v iff (K, -ab)_v = (a, b)_v
    places = [INF, *sorted(set(scale_primes) | set(candidate_primes(q) if q else ()))]
    target = {v: hilbert(a, b, v) for v in places}
    for Z in _sab_z_candidates(scale_primes, height):
        K = q + a * b * Z * Z
        if K != 0:
            bad = next((v for v in places if hilbert(K, -a * b, v) != target[v]), None)
            if bad is not None:
                # an obstruction tends to recur at the same place
                places.remove(bad)
                places.insert(0, bad)
                continue
        sol = solve_conic(a, b, K)
        if sol is not None:
            X, Y = sol
            return Witness(0 if Z == 0 else 1, {prefix + "x": 2 * X, prefix + "y": 2 * Y})
    return None


def _sab_z_candidates(primes: Sequence[int], height: int) -> Iterator[Fraction]:
    """Z0 * u / v for Z0 >= 0 by height, with u, v coprime squarefree products of primes.

    Only Z^2 matters, so signs are skipped.  Useful Z often carry the primes
    of 2ab in numerator or denominator, which plain height order reaches late.
    """
    subs = [math.prod(c) for k in range(len(primes) + 1) for c in combinations(primes, k)]
    scales = sorted(
        {Fraction(u, v) for u in subs for v in subs if math.gcd(u, v) == 1},
        key=lambda s: (max(s.numerator, s.denominator), s),
    )
    seen: set[Fraction] = set()
    for Z0 in rationals_by_height(height):
        if Z0 < 0:
            continue
        for s in scales:
            Z = Z0 * s
            if Z not in seen:
                seen.add(Z)
                yield Z


def sab_bruteforce(r, a, b, height: int = 12) -> tuple[Fraction, Fraction, Fraction] | None:
    """Direct search for X, Z with (q + abZ^2 - aX^2)/b a square; no local theory."""
    r, a, b = Q(r), Q(a), Q(b)
    q = (r / 2) ** 2 - 1
    pool = list(rationals_by_height(height))
    for Z in pool:
        K = q + a * b * Z * Z
        for X in pool:
            Y = sqrt_exact((K - a * X * X) / b)
            if Y is not None:
                return X, Y, Z
    return None


def _tab_candidates(t: Fraction, height: int) -> Iterable[Fraction]:
    yield from (Fraction(2), Fraction(-2), t - 2, t + 2)
    yield from rationals_by_height(height)


def witness_Tab(
    t, a, b, prefix: str = "", height: int = DEFAULT_WITNESS_HEIGHT, guided: bool = True
) -> Witness | None:
    t, a, b = Q(t), Q(a), Q(b)
    if guided and not in_Tab(t, a, b):
        return None
    seen = set()
    for r in _tab_candidates(t, height):
        if r in seen:
            continue
        seen.add(r)
        if not (in_Sab(r, a, b) and in_Sab(t - r, a, b)):
            continue
        w1 = witness_Sab(r, a, b, prefix + "S1.", height)
        w2 = witness_Sab(t - r, a, b, prefix + "S2.", height)
        if w1 is not None and w2 is not None:
            asg = {prefix + "r": r, **w1.assignment, **w2.assignment}
            return Witness(w1.index * 2 + w2.index, asg)
    return None


def witness_TabUnit(
    t, a, b, prefix: str = "", height: int = DEFAULT_WITNESS_HEIGHT, guided: bool = True
) -> Witness | None:
    t = Q(t)
    if t == 0:
        return None
    return witness_Tab(t + 1 / t, a, b, prefix, height, guided)


def witness_SqTabUnit(
    x, a, b, prefix: str = "", height: int = DEFAULT_WITNESS_HEIGHT, guided: bool = True
) -> Witness | None:
    x = Q(x)
    if x == 0:
        return Witness(0, {})
    if guided:
        if not in_SqTabUnit(x, a, b):
            return None
        y = Fraction(1)
        for p in delta_set(a, b):
            y *= Fraction(p) ** (-(valuation(x, p) // 2))
        ys: Iterable[Fraction] = (y,)
    else:
        ys = (y for y in rationals_by_height(height, nonzero=True) if in_TabUnit(x * y * y, a, b))
    for y in ys:
        w = witness_TabUnit(x * y * y, a, b, prefix + "TU.", height)
        if w is not None:
            return Witness(1 + w.index, {prefix + "y": y, **w.assignment})
    return None


def witness_Jabc(
    t, a, b, c, prefix: str = "", height: int = DEFAULT_WITNESS_HEIGHT, guided: bool = True
) -> Witness | None:
    t, a, b, c = Q(t), Q(a), Q(b), Q(c)
    if t == 0:
        return Witness(0, {})
    if guided and not in_Jabc(t, a, b, c):
        return None
    for y in rationals_by_height(height, nonzero=True):
        s, w = t / (c * y * y), 1 - c * y * y
        if not (in_Tab(s, a, b) and in_SqTabUnit(w, a, b)):
            continue
        wt = witness_Tab(s, a, b, prefix + "T.", height)
        wq = witness_SqTabUnit(w, a, b, prefix + "Q.", height)
        if wt is not None and wq is not None:
            return Witness(1 + wt.index * 5 + wq.index, {prefix + "y": y, **wt.assignment, **wq.assignment})
    return None


# -- descriptors and reconciliation ----------------------------------------------
TAGS = ("Z2", "Z2unit", "Sab", "Tab", "TabUnit", "SqTabUnit", "Jabc")
BUDGETS = {"Z2": 2, "Z2unit": 2, "Sab": 2, "Tab": 5, "TabUnit": 5, "SqTabUnit": 6, "Jabc": 12}


@dataclass(frozen=True)
class LocalSetDescriptor:
    tag: str
    a: Fraction | None = None
    b: Fraction | None = None
    c: Fraction | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown set tag {self.tag!r}")
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, Q(v))
        if self.tag in ("Z2", "Z2unit"):
            return
        if self.a is None or self.b is None:
            raise ValueError(f"{self.tag} needs parameters a and b")
        _check_ab(self.a, self.b)
        if self.tag == "Jabc" and not self.c:
            raise ValueError("Jabc needs a nonzero parameter c")

    def build(self) -> GoodFormula:
        t, a, b, c = "t", self.a, self.b, self.c
        return {
            "Z2": lambda: build_Z2(t),
            "Z2unit": lambda: build_Z2unit(t),
            "Sab": lambda: build_Sab(a, b, t),
            "Tab": lambda: build_Tab(a, b, t),
            "TabUnit": lambda: build_TabUnit(a, b, t),
            "SqTabUnit": lambda: build_SqTabUnit(a, b, t),
            "Jabc": lambda: build_Jabc(a, b, c, t),
        }[self.tag]()

    def oracle(self, t) -> bool:
        a, b, c = self.a, self.b, self.c
        return {
            "Z2": lambda: in_Z2(t),
            "Z2unit": lambda: in_Z2unit(t),
            "Sab": lambda: in_Sab(t, a, b),
            "Tab": lambda: in_Tab(t, a, b),
            "TabUnit": lambda: in_TabUnit(t, a, b),
            "SqTabUnit": lambda: in_SqTabUnit(t, a, b),
            "Jabc": lambda: in_Jabc(t, a, b, c),
        }[self.tag]()

    def witness(self, t, height: int = DEFAULT_WITNESS_HEIGHT, guided: bool = True) -> Witness | None:
        a, b, c, g = self.a, self.b, self.c, guided
        return {
            "Z2": lambda: witness_Z2(t),
            "Z2unit": lambda: witness_Z2unit(t),
            "Sab": lambda: witness_Sab(t, a, b, height=height, guided=g),
            "Tab": lambda: witness_Tab(t, a, b, height=height, guided=g),
            "TabUnit": lambda: witness_TabUnit(t, a, b, height=height, guided=g),
            "SqTabUnit": lambda: witness_SqTabUnit(t, a, b, height=height, guided=g),
            "Jabc": lambda: witness_Jabc(t, a, b, c, height=height, guided=g),
        }[self.tag]()


@dataclass(frozen=True)
class Truth:
    verdict: str  # true-with-witness | true-by-oracle | false-by-oracle | unknown
    witness: Witness | None = None
    note: str = ""


def formula_truth(
    F: GoodFormula, t, desc: LocalSetDescriptor, height_bound: int = DEFAULT_WITNESS_HEIGHT
) -> Truth:
    """Oracle verdict, upgraded to a checked witness when one turns up."""
    t = Q(t)
    try:
        truth = desc.oracle(t)
    except FactorizationBudgetExceeded as exc:
        return Truth("unknown", note=str(exc))
    if not truth:
        return Truth("false-by-oracle")
    w = desc.witness(t, height_bound) if height_bound > 0 else None
    if w is None:
        return Truth("true-by-oracle", note="witness search exhausted")
    if not F.check(w, {"t": t}):
        raise AssertionError(f"witness for {desc.tag} at t={t} fails its clause")
    return Truth("true-with-witness", w)
