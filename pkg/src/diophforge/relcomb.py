"""Relation-combining polynomials: one equation forcing k rationals to be squares.

For A_1..A_k in Q* the polynomial J_k(A_1..A_k, x) has a rational zero in x
exactly when every A_s is a square.  It is built from

    I_k = prod over sign vectors e of (x + e_1 x_1 + e_2 x_2 y + ... + e_k x_k y^(k-1)),

rewritten in the squares X_s = x_s^2 (I_k*), evaluated at y = W with
W = (k + sum A_s^2)(1 + sum A_s^-2), and cleared by prod A_s^((k-1) 2^(k+1)).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import flint

from . import circuit as C
from .exact import Q, is_square, sqrt_exact
from .poly import (
    RatFunc,
    SparsePoly,
    TermBudgetExceeded,
    current_term_budget,
)

EXPANSION_MAX_K = 4


def clearing_exponent(k: int) -> int:
    return (k - 1) * 2 ** (k + 1)


def y_degree(k: int) -> int:
    """Degree of I_k* in y, which is also the power of D = prod A_s^2 used."""
    return (k - 1) * 2 ** k


def a_names(k: int) -> list[str]:
    return [f"A{s}" for s in range(1, k + 1)]


def _check_k(k: int, expand: bool = False) -> None:
    if not isinstance(k, int) or k < 1:
        raise ValueError("k must be a positive integer")
    if expand and k > EXPANSION_MAX_K:
        raise ValueError(f"expansion is only offered for k <= {EXPANSION_MAX_K}")


@functools.lru_cache(maxsize=None)
def build_Ik(k: int) -> SparsePoly:
    _check_k(k, expand=True)
    xs = [SparsePoly.var(f"x{s}") for s in range(1, k + 1)]
    x, y = SparsePoly.var("x"), SparsePoly.var("y")
    ypow = [y ** s for s in range(k)]
    out = SparsePoly.const(1)
    for eps in product((1, -1), repeat=k):
        out = out * (x + sum((e * xs[s] * ypow[s] for s, e in enumerate(eps)), SparsePoly(())))
    names = [f"x{s}" for s in range(1, k + 1)] + ["x", "y"]
    return out.with_vars(names)


@functools.lru_cache(maxsize=None)
def build_IkStar(k: int) -> SparsePoly:
    ik = build_Ik(k)
    terms = {}
    for e, c in ik.terms.items():
        if any(v % 2 for v in e[:k]):
            raise ArithmeticError(f"odd power of some x_s in I_{k}: {e}")
        terms[tuple(v // 2 for v in e[:k]) + e[k:]] = c
    return SparsePoly(a_names(k) + ["x", "y"], terms)


def _w_parts(k: int) -> tuple[SparsePoly, SparsePoly]:
    A = [SparsePoly.var(n) for n in a_names(k)]
    sq = [a * a for a in A]
    D = SparsePoly.const(1)
    for s in sq:
        D = D * s
    partial = SparsePoly(())
    for j in range(k):
        term = SparsePoly.const(1)
        for i in range(k):
            if i != j:
                term = term * sq[i]
        partial = partial + term
    N = (k + sum(sq, SparsePoly(()))) * (D + partial)
    return N, D


def build_W(k: int) -> RatFunc:
    """W = (k + sum A_s^2)(1 + sum A_s^-2) with denominator prod A_s^2."""
    _check_k(k)
    N, D = _w_parts(k)
    return RatFunc(N, D)


def w_value(A: Sequence) -> Fraction:
    A = [Q(a) for a in A]
    if any(a == 0 for a in A):
        raise ZeroDivisionError("W needs nonzero arguments")
    return (len(A) + sum(a * a for a in A)) * (1 + sum(1 / (a * a) for a in A))


# -- expansion (k <= 4) --------------------------------------------------------
def _to_flint(p: SparsePoly, ctx, names: Sequence[str]):
    q = p.with_vars(names)
    return ctx.from_dict({e: int(c) for e, c in q.terms.items()})


def _from_flint(fp, names: Sequence[str]) -> SparsePoly:
    return SparsePoly(names, {tuple(int(v) for v in e): int(c) for e, c in fp.to_dict().items()})


@functools.lru_cache(maxsize=None)
def expand_Jk(k: int) -> SparsePoly:
    """J_k as an explicit integer polynomial in (A_1..A_k, x).

    Computes sum_e c_e(A, x) N^e D^(G-e), where c_e is the y^e coefficient of
    I_k* and G the y-degree, in Horner order.  Raises TermBudgetExceeded as
    soon as the running sum outgrows the configured term budget.
    """
    _check_k(k, expand=True)
    names = a_names(k) + ["x"]
    ctx = flint.fmpz_mpoly_ctx.get(names, flint.Ordering.lex)
    star = build_IkStar(k)
    coeffs = {e: _to_flint(c, ctx, names) for e, c in star.coeffs_in("y").items()}
    N, D = _w_parts(k)
    fN, fD = _to_flint(N, ctx, names), _to_flint(D, ctx, names)
    G = y_degree(k)
    budget = current_term_budget()
    zero = ctx.from_dict({})
    acc = coeffs.get(G, zero)
    dpow = ctx.from_dict({(0,) * len(names): 1})
    for e in range(G - 1, -1, -1):
        dpow = dpow * fD
        acc = acc * fN
        c = coeffs.get(e)
        if c is not None:
            acc = acc + c * dpow
        if len(acc) > budget:
            raise TermBudgetExceeded(len(acc), budget, f"J_{k} expansion (y-power {e})")
    out = _from_flint(acc, names)
    if not out.is_integral():
        raise ArithmeticError(f"J_{k} expansion has a non-integer coefficient")
    return out


# -- circuit form (all k) ------------------------------------------------------
def _alg_square(elem: dict[int, C.Expr], A: Sequence[C.Expr]) -> dict[int, C.Expr]:
    """Square in the algebra with basis sqrt(A_S), S a bitmask."""
    keys = sorted(elem)
    acc: dict[int, list[C.Expr]] = {}
    for i, S in enumerate(keys):
        for T in keys[i:]:
            common = S & T
            scal = [A[b] for b in range(len(A)) if common >> b & 1]
            factor = [C.const(2)] if S != T else []
            acc.setdefault(S ^ T, []).append(C.eprod(factor + scal + [elem[S], elem[T]]))
    return {S: C.esum(ts) for S, ts in acc.items()}


@functools.lru_cache(maxsize=None)
def jk_function(k: int) -> C.Function:
    """J_k as a circuit with parameters A1..Ak, x.

    Starts from D^(k-1) (x + sum sqrt(A_s) W^(s-1)) written with N and D,
    then takes norms one square root at a time: a + b sqrt(A_j) becomes
    a^2 - A_j b^2.  The last scalar is D^G I_k*(A, x, N/D) = J_k.
    """
    _check_k(k)
    A = [C.var(n) for n in a_names(k)]
    x = C.var("x")
    sq = [C.square(a) for a in A]
    D = C.eprod(sq)
    partial = C.esum(C.eprod(sq[:j] + sq[j + 1:]) for j in range(k))
    N = C.eprod([C.esum([C.const(k)] + sq), C.esum([D, partial])])
    alpha: dict[int, C.Expr] = {0: C.eprod([x, C.power(D, k - 1)])}
    for s in range(1, k + 1):
        alpha[1 << (s - 1)] = C.eprod([C.power(N, s - 1), C.power(D, k - s)])
    for j in range(k, 0, -1):
        bit = 1 << (j - 1)
        a = {S: c for S, c in alpha.items() if not S & bit}
        b = {S ^ bit: c for S, c in alpha.items() if S & bit}
        a2 = _alg_square(a, A)
        b2 = _alg_square(b, A)
        alpha = dict(a2)
        for S, c in b2.items():
            term = C.neg(C.eprod([A[j - 1], c]))
            alpha[S] = C.esum([alpha[S], term]) if S in alpha else term
    if set(alpha) - {0}:
        raise ArithmeticError("norm recursion left irrational components")
    return C.Function(f"J{k}", a_names(k) + ["x"], alpha.get(0, C.ZERO))


def jk_dag(k: int) -> C.ExprDAG:
    fn = jk_function(k)
    return C.ExprDAG(fn(*[C.var(p) for p in fn.params]))


@dataclass(frozen=True)
class JkBundle:
    k: int
    Ik: SparsePoly | None
    IkStar: SparsePoly | None
    W: RatFunc
    Jk: SparsePoly | None
    dag: C.ExprDAG
    clearing_exponent: int


def build_Jk(k: int, expand: bool | None = None) -> JkBundle:
    """Everything about J_k; polynomial forms only when k <= 4 and ``expand``."""
    _check_k(k)
    if expand is None:
        expand = k <= 3
    small = k <= EXPANSION_MAX_K
    return JkBundle(
        k=k,
        Ik=build_Ik(k) if small else None,
        IkStar=build_IkStar(k) if small else None,
        W=build_W(k),
        Jk=expand_Jk(k) if expand and small else None,
        dag=jk_dag(k),
        clearing_exponent=clearing_exponent(k),
    )


# -- deciding and witnessing ---------------------------------------------------
def jk_decide(A: Sequence) -> bool:
    A = [Q(a) for a in A]
    if not A or any(a == 0 for a in A):
        raise ValueError("need at least one nonzero argument, all nonzero")
    return all(is_square(a) for a in A)


def jk_witness(A: Sequence) -> Fraction:
    """x = -(a_1 + a_2 W + ... + a_k W^(k-1)) with a_s^2 = A_s."""
    A = [Q(a) for a in A]
    roots = [sqrt_exact(a) for a in A]
    if any(a == 0 for a in A) or any(r is None for r in roots):
        raise ValueError("every argument must be a nonzero square")
    W = w_value(A)
    return -sum(r * W ** s for s, r in enumerate(roots))


def jk_eval(A: Sequence, x) -> Fraction:
    fn = jk_function(len(A))
    point = dict(zip(fn.params, [Q(a) for a in A] + [Q(x)]))
    return C.evaluate(fn.body, point)


def _rational_roots(coeffs: Sequence[int]) -> list[Fraction]:
    """Rational roots of an integer polynomial, via its linear factors."""
    p = flint.fmpz_poly(list(coeffs))
    if p == 0:
        raise ValueError("zero polynomial has every root")
    roots = set()
    for fac, _mult in p.factor()[1]:
        if fac.degree() == 1:
            c0, c1 = int(fac[0]), int(fac[1])
            roots.add(Fraction(-c0, c1))
    return sorted(roots)


def jk_rational_roots(A: Sequence) -> list[Fraction]:
    """Rational x with J_k(A, x) = 0, from the expanded polynomial (k <= 4)."""
    A = [Q(a) for a in A]
    k = len(A)
    J = expand_Jk(k)
    L = 1
    for a in A:
        L = L * a.denominator // math.gcd(L, a.denominator)
    by_x: dict[int, Fraction] = {}
    for e, c in J.terms.items():
        t = Fraction(c)
        for a, p in zip(A, e[:k]):
            t *= a ** p
        by_x[e[k]] = by_x.get(e[k], Fraction(0)) + t
    top = max(by_x)
    den = 1
    for v in by_x.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    return _rational_roots([int(by_x.get(i, 0) * den) for i in range(top + 1)])


# -- the W bound ---------------------------------------------------------------
def _sqrt_interval(r: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    n = r.numerator * r.denominator
    lo = math.isqrt(n * scale * scale)
    hi = lo if lo * lo == n * scale * scale else lo + 1
    den = r.denominator * scale
    return Fraction(lo, den), Fraction(hi, den)


def verify_wbound(A: Sequence, max_bits: int = 1 << 16) -> bool:
    """Decide W(A) >= (1 + sum sqrt|A_s|) / min sqrt|A_s| exactly.

    When every |A_s| is a square both sides are rational and compared
    directly.  Otherwise the right side is irrational, the two sides differ,
    and interval refinement must separate them.
    """
    A = [abs(Q(a)) for a in A]
    if not A or any(a == 0 for a in A):
        raise ValueError("need nonzero arguments")
    W = w_value(A)
    roots = [sqrt_exact(a) for a in A]
    if all(r is not None for r in roots):
        return W >= (1 + sum(roots)) / min(roots)
    bits = 32
    while bits <= max_bits:
        iv = [_sqrt_interval(a, bits) for a in A]
        lo_min = min(lo for lo, _ in iv)
        hi_min = min(hi for _, hi in iv)
        rhs_hi = (1 + sum(hi for _, hi in iv)) / lo_min
        rhs_lo = (1 + sum(lo for lo, _ in iv)) / hi_min
        if W >= rhs_hi:
            return True
        if W < rhs_lo:
            return False
        bits *= 2
    raise ArithmeticError("interval refinement did not separate the sides")
