"""Exact sparse multivariate polynomials over Z (transiently Q)."""

from __future__ import annotations

import contextlib
import contextvars
import json
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .exact import Q, format_rational, parse_rational

Coeff = Union[int, Fraction]
Exponent = tuple[int, ...]

NEG_INF = float("-inf")
DEFAULT_TERM_BUDGET = 5_000_000

_term_budget: contextvars.ContextVar[int] = contextvars.ContextVar(
    "term_budget", default=DEFAULT_TERM_BUDGET
)


class TermBudgetExceeded(MemoryError):
    def __init__(self, terms: int, budget: int, what: str = "polynomial"):
        super().__init__(f"{what} reached {terms} terms, over the budget of {budget}")
        self.terms = terms
        self.budget = budget


class InsufficientClearing(ArithmeticError):
    def __init__(self, residual: "SparsePoly"):
        super().__init__(f"residual denominator {residual} survives clearing")
        self.residual = residual


class PolyParseError(ValueError):
    def __init__(self, msg: str, pos: str | int):
        super().__init__(f"{msg} (at {pos})")
        self.pos = pos


@contextlib.contextmanager
def term_budget(n: int) -> Iterator[None]:
    token = _term_budget.set(n)
    try:
        yield
    finally:
        _term_budget.reset(token)


def current_term_budget() -> int:
    return _term_budget.get()


def _norm(c: Coeff) -> Coeff:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class SparsePoly:
    """Polynomial as a map from exponent vectors to nonzero coefficients.

    Variables are identified by name; binary operations align the two
    variable lists, so ``x + y`` works without declaring a common ring.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Iterable[str], terms: Mapping[Exponent, Coeff] | None = None):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variable names in {self.vars}")
        n = len(self.vars)
        clean: dict[Exponent, Coeff] = {}
        for e, c in (terms or {}).items():
            if len(e) != n:
                raise ValueError(f"exponent {e} does not match {n} variables")
            if c:
                clean[tuple(e)] = _norm(c)
        self.terms = clean

    # -- construction --------------------------------------------------------
    @classmethod
    def var(cls, name: str) -> "SparsePoly":
        return cls((name,), {(1,): 1})

    @classmethod
    def const(cls, c: Coeff, vars: Iterable[str] = ()) -> "SparsePoly":
        vs = tuple(vars)
        return cls(vs, {(0,) * len(vs): c})

    @classmethod
    def zero(cls, vars: Iterable[str] = ()) -> "SparsePoly":
        return cls(vars)

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            return other
        if isinstance(other, (int, Fraction)):
            return SparsePoly.const(other)
        return NotImplemented

    def with_vars(self, vars: Iterable[str]) -> "SparsePoly":
        """Re-express over a variable list containing every used variable."""
        vs = tuple(vars)
        pos = {v: i for i, v in enumerate(vs)}
        used = self.used_vars()
        missing = used - pos.keys()
        if missing:
            raise ValueError(f"variables {sorted(missing)} not in target list")
        idx = [pos.get(v) for v in self.vars]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(vs)
            for i, k in enumerate(e):
                if k:
                    ne[idx[i]] = k
            out[tuple(ne)] = c
        return SparsePoly(vs, out)

    def _aligned(self, other: "SparsePoly") -> tuple[tuple[str, ...], dict, dict]:
        if self.vars == other.vars:
            return self.vars, self.terms, other.terms
        vs = self.vars + tuple(v for v in other.vars if v not in self.vars)
        return vs, self.with_vars(vs).terms, other.with_vars(vs).terms

    # -- ring operations -----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vs, a, b = self._aligned(other)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return _checked(SparsePoly(vs, out))

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        vs, a, b = self._aligned(other)
        if len(a) < len(b):
            a, b = b, a
        budget = _term_budget.get()
        out: dict[Exponent, Coeff] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
            if len(out) > budget:
                raise TermBudgetExceeded(len(out), budget, "product")
        return _checked(SparsePoly(vs, out))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = SparsePoly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        _, a, b = self._aligned(other)
        return a == b

    def __hash__(self):
        return hash(frozenset(self.canonical().terms.items()))

    # -- inspection ----------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def used_vars(self) -> set[str]:
        used = set()
        for e in self.terms:
            for v, k in zip(self.vars, e):
                if k:
                    used.add(v)
        return used

    def canonical(self) -> "SparsePoly":
        """Drop unused variables and sort the rest by name."""
        return self.with_vars(sorted(self.used_vars()))

    def total_degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def degree(self, var: str):
        if not self.terms:
            return NEG_INF
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.terms.values())

    def coefficient(self, monomial: Mapping[str, int]) -> Coeff:
        e = tuple(monomial.get(v, 0) for v in self.vars)
        if any(v not in self.vars for v, k in monomial.items() if k):
            return 0
        return self.terms.get(e, 0)

    def coeffs_in(self, var: str) -> dict[int, "SparsePoly"]:
        """Coefficients as a polynomial in ``var`` over the other variables."""
        if var not in self.vars:
            return {0: self} if self.terms else {}
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            out.setdefault(e[i], {})[e[:i] + e[i + 1:]] = c
        return {k: SparsePoly(rest, t) for k, t in sorted(out.items())}

    def evaluate(self, assignment: Mapping[str, Coeff]):
        missing = [v for v in self.used_vars() if v not in assignment]
        if missing:
            raise KeyError(f"no value for {sorted(missing)}")
        vals = [Q(assignment[v]) if v in assignment else 0 for v in self.vars]
        pows: list[dict[int, Fraction]] = [{} for _ in vals]
        total = Fraction(0)
        for e, c in self.terms.items():
            t = Fraction(c)
            for i, k in enumerate(e):
                if k:
                    p = pows[i].get(k)
                    if p is None:
                        p = pows[i][k] = vals[i] ** k
                    t *= p
            total += t
        return total

    def subs(self, mapping: Mapping[str, "SparsePoly | Coeff"]) -> "SparsePoly":
        """Compose: replace variables by polynomials."""
        keep = [v for v in self.vars if v not in mapping]
        imgs = {v: (p if isinstance(p, SparsePoly) else SparsePoly.const(p)) for v, p in mapping.items()}
        cache: dict[tuple[str, int], SparsePoly] = {}

        def power(v: str, k: int) -> SparsePoly:
            key = (v, k)
            if key not in cache:
                cache[key] = imgs[v] ** k
            return cache[key]

        result = SparsePoly(keep)
        groups: dict[Exponent, dict[Exponent, Coeff]] = {}
        ki = [i for i, v in enumerate(self.vars) if v not in mapping]
        si = [i for i, v in enumerate(self.vars) if v in mapping]
        for e, c in self.terms.items():
            sub_e = tuple(e[i] for i in si)
            groups.setdefault(sub_e, {})[tuple(e[i] for i in ki)] = c
        for sub_e, rest in groups.items():
            part = SparsePoly(keep, rest)
            for i, k in zip(si, sub_e):
                if k:
                    part = part * power(self.vars[i], k)
            result = result + part
        return result

    def rename(self, mapping: Mapping[str, str]) -> "SparsePoly":
        return SparsePoly([mapping.get(v, v) for v in self.vars], self.terms)

    # -- text forms ----------------------------------------------------------
    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            cs = format_rational(Fraction(c))
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_obj(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [
                {"e": list(e), "c": format_rational(Fraction(c))}
                for e, c in sorted(self.terms.items(), reverse=True)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj())

    @classmethod
    def from_obj(cls, obj, where: str = "$") -> "SparsePoly":
        if not isinstance(obj, dict) or "vars" not in obj or "terms" not in obj:
            raise PolyParseError("expected an object with 'vars' and 'terms'", where)
        vs = obj["vars"]
        if not isinstance(vs, list) or not all(isinstance(v, str) for v in vs):
            raise PolyParseError("'vars' must be a list of names", f"{where}.vars")
        terms: dict[Exponent, Coeff] = {}
        for i, t in enumerate(obj["terms"]):
            pos = f"{where}.terms[{i}]"
            try:
                e = tuple(int(k) for k in t["e"])
                c = parse_rational(t["c"])
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise PolyParseError(f"bad term: {exc}", pos) from None
            if len(e) != len(vs) or any(k < 0 for k in e):
                raise PolyParseError("exponent vector does not fit the variables", pos)
            if e in terms:
                raise PolyParseError("repeated exponent vector", pos)
            terms[e] = c
        return cls(vs, terms)

    @classmethod
    def from_json(cls, text: str) -> "SparsePoly":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolyParseError(exc.msg, exc.pos) from None
        return cls.from_obj(obj)


def _checked(p: SparsePoly) -> SparsePoly:
    budget = _term_budget.get()
    if len(p.terms) > budget:
        raise TermBudgetExceeded(len(p.terms), budget)
    return p


def variables(*names: str) -> tuple[SparsePoly, ...]:
    return tuple(SparsePoly.var(n) for n in names)


def total_degree(p: SparsePoly):
    return p.total_degree()


class RatFunc:
    """A quotient of polynomials; no cancellation is attempted."""

    __slots__ = ("num", "den")

    def __init__(self, num: SparsePoly, den: SparsePoly):
        if den.is_zero():
            raise ZeroDivisionError("denominator is the zero polynomial")
        self.num = num
        self.den = den

    def evaluate(self, assignment: Mapping[str, Coeff]) -> Fraction:
        d = self.den.evaluate(assignment)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at this point")
        return self.num.evaluate(assignment) / d

    def __repr__(self) -> str:
        return f"({self.num}) / ({self.den})"


def substitute_cleared(p: SparsePoly, var: str, f: RatFunc, clearing_power: int) -> SparsePoly:
    """``den(f)^clearing_power * p(var -> f)`` as a polynomial.

    Raises InsufficientClearing when some power of ``var`` in ``p`` exceeds
    the clearing power, reporting the leftover denominator.
    """
    groups = p.coeffs_in(var)
    top = max(groups, default=0)
    if top > clearing_power:
        raise InsufficientClearing(f.den ** (top - clearing_power))
    num_pows = [SparsePoly.const(1)]
    for _ in range(top):
        num_pows.append(num_pows[-1] * f.num)
    den_pows = {0: SparsePoly.const(1)}

    def den_pow(k: int) -> SparsePoly:
        if k not in den_pows:
            den_pows[k] = f.den ** k
        return den_pows[k]

    result = SparsePoly(())
    for e, coeff in groups.items():
        result = result + coeff * num_pows[e] * den_pow(clearing_power - e)
    return result
