"""Hash-consed arithmetic circuits over Z with symbolic degree accounting.

Nodes are interned, so structurally equal subexpressions are the same
object and sharing is automatic.  Besides the ring operations there is a
``call`` node that applies a named :class:`Function` (a circuit with
parameters) to argument circuits; the final polynomial uses it to share one
body of each relation-combining polynomial across all clauses.
"""

from __future__ import annotations

import json
import math
import weakref
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import gmpy2

from .exact import Q, format_rational, is_prime, parse_rational
from .poly import NEG_INF, PolyParseError, SparsePoly

_OPS = ("const", "var", "add", "mul", "pow", "call")
_INTERN: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


class Expr:
    __slots__ = ("op", "args", "data", "__weakref__")

    def __new__(cls, op: str, args: tuple = (), data=None):
        key = (op, data, args)
        node = _INTERN.get(key)
        if node is None:
            node = object.__new__(cls)
            node.op = op
            node.args = args
            node.data = data
            _INTERN[key] = node
        return node

    def __reduce__(self):
        raise TypeError("serialize circuits with to_json")

    # Python operators build binary nodes; use esum/eprod for long sums.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(lift(other)))

    def __rsub__(self, other):
        return add(lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __pow__(self, e: int):
        return power(self, e)

    def __repr__(self) -> str:
        if self.op == "const":
            return format_rational(Fraction(self.data))
        if self.op == "var":
            return self.data
        n = count_nodes(self)
        return f"<Expr {self.op} nodes={n}>"


class Function:
    """A named circuit with formal parameters, applied through call nodes."""

    __slots__ = ("name", "params", "body", "_degree_memo", "__weakref__")

    def __init__(self, name: str, params: Sequence[str], body: Expr):
        self.name = name
        self.params = tuple(params)
        self.body = body
        self._degree_memo: dict[tuple, float | int] = {}
        stray = free_vars(body) - set(self.params)
        if stray:
            raise ValueError(f"function {name} body uses unbound {sorted(stray)}")

    def __call__(self, *args) -> Expr:
        if len(args) != len(self.params):
            raise TypeError(f"{self.name} takes {len(self.params)} arguments")
        return Expr("call", tuple(lift(a) for a in args), self)

    def __repr__(self) -> str:
        return f"<Function {self.name}({', '.join(self.params)})>"


# -- constructors -------------------------------------------------------------
def const(c) -> Expr:
    c = Q(c)
    return Expr("const", (), c.numerator if c.denominator == 1 else c)


def var(name: str) -> Expr:
    return Expr("var", (), name)


def lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, str)):
        return const(x)
    raise TypeError(f"cannot use {type(x).__name__} in a circuit")


ZERO = const(0)
ONE = const(1)


def _is_const(e: Expr, value=None) -> bool:
    return e.op == "const" and (value is None or e.data == value)


def esum(terms: Iterable) -> Expr:
    args = []
    c = Fraction(0)
    for t in terms:
        t = lift(t)
        if t.op == "const":
            c += t.data
        else:
            args.append(t)
    if c:
        args.append(const(c))
    if not args:
        return ZERO
    if len(args) == 1:
        return args[0]
    return Expr("add", tuple(args))


def eprod(factors: Iterable) -> Expr:
    args = []
    c = Fraction(1)
    for f in factors:
        f = lift(f)
        if f.op == "const":
            if f.data == 0:
                return ZERO
            c *= f.data
        else:
            args.append(f)
    if c != 1:
        args.insert(0, const(c))
    if not args:
        return ONE
    if len(args) == 1:
        return args[0]
    return Expr("mul", tuple(args))


def add(*terms) -> Expr:
    return esum(terms)


def mul(*factors) -> Expr:
    return eprod(factors)


def neg(e) -> Expr:
    e = lift(e)
    if e.op == "const":
        return const(-e.data)
    return eprod((const(-1), e))


def power(e, k: int) -> Expr:
    e = lift(e)
    if not isinstance(k, int) or k < 0:
        raise ValueError("exponent must be a nonnegative integer")
    if k == 0:
        return ONE
    if k == 1:
        return e
    if e.op == "const":
        return const(Fraction(e.data) ** k)
    if e.op == "pow":
        return Expr("pow", e.args, e.data * k)
    return Expr("pow", (e,), k)


def square(e) -> Expr:
    return power(e, 2)


def sum_of_squares(terms: Iterable) -> Expr:
    return esum(square(t) for t in terms)


# -- traversal ----------------------------------------------------------------
def topo_order(root: Expr) -> list[Expr]:
    """Children before parents; call bodies are not entered."""
    order: list[Expr] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in reversed(node.args):
            if id(a) not in seen:
                stack.append((a, False))
    return order


def count_nodes(root: Expr) -> int:
    return len(topo_order(root))


def free_vars(root: Expr) -> set[str]:
    return {n.data for n in topo_order(root) if n.op == "var"}


def functions_used(root: Expr) -> list[Function]:
    out: dict[int, Function] = {}
    for n in topo_order(root):
        if n.op == "call":
            out.setdefault(id(n.data), n.data)
    return list(out.values())


def is_square_form(e: Expr) -> bool:
    """True when ``e`` is syntactically a square times a square constant."""
    if e.op == "pow":
        return e.data % 2 == 0 or is_square_form(e.args[0])
    if e.op == "mul":
        return all(is_square_form(a) for a in e.args)
    if e.op == "const":
        c = Fraction(e.data)
        return c > 0 and math.isqrt(c.numerator) ** 2 == c.numerator and math.isqrt(c.denominator) ** 2 == c.denominator
    return False


# -- degree accounting --------------------------------------------------------
def _max(xs):
    return max(xs, default=NEG_INF)


def degree_bound(root: Expr, var_degrees: Mapping[str, float | int] | None = None, default: int = 1):
    """Bottom-up upper bound on total degree.

    ``var_degrees`` overrides the degree of individual variables (use 0 to
    treat a variable as a constant, so the result bounds the degree in the
    others).
    """
    vd = var_degrees or {}
    memo: dict[int, float | int] = {}
    for n in topo_order(root):
        op = n.op
        if op == "const":
            d = NEG_INF if n.data == 0 else 0
        elif op == "var":
            d = vd.get(n.data, default)
        elif op == "add":
            d = _max(memo[id(a)] for a in n.args)
        elif op == "mul":
            ds = [memo[id(a)] for a in n.args]
            d = NEG_INF if NEG_INF in ds else sum(ds)
        elif op == "pow":
            c = memo[id(n.args[0])]
            d = c * n.data if c != NEG_INF else NEG_INF
        else:
            d = _call_degree(n.data, tuple(memo[id(a)] for a in n.args))
        memo[id(n)] = d
    return memo[id(root)]


def _call_degree(fn: Function, arg_degrees: tuple):
    hit = fn._degree_memo.get(arg_degrees)
    if hit is None:
        hit = degree_bound(fn.body, dict(zip(fn.params, arg_degrees)), default=0)
        fn._degree_memo[arg_degrees] = hit
    return hit


def degree_in(root: Expr, name: str):
    return degree_bound(root, {name: 1}, default=0)


# -- evaluation ---------------------------------------------------------------
class _ModRing:
    __slots__ = ("q",)

    def __init__(self, q: int):
        self.q = q

    def const(self, c):
        c = Fraction(c)
        return c.numerator * pow(c.denominator, -1, self.q) % self.q

    def add(self, xs):
        return sum(xs) % self.q

    def mul(self, xs):
        out = 1
        for x in xs:
            out = out * x % self.q
            if not out:
                break
        return out

    def pow(self, x, e):
        return pow(x, e, self.q)

    def is_zero(self, x):
        return x == 0


class _HomogRing:
    """Values n / L**d with a single common denominator L; no gcds."""

    __slots__ = ("L", "_lp")

    def __init__(self, L: int):
        self.L = gmpy2.mpz(L)
        self._lp = {0: gmpy2.mpz(1)}

    def lpow(self, d):
        p = self._lp.get(d)
        if p is None:
            p = self._lp[d] = self.L ** d
        return p

    def const(self, c):
        c = Fraction(c)
        if c.denominator != 1:
            raise ValueError("homogenized evaluation needs integer constants")
        return (gmpy2.mpz(c.numerator), 0)

    def add(self, xs):
        xs = [x for x in xs if x[0]]
        if not xs:
            return (gmpy2.mpz(0), 0)
        d = max(x[1] for x in xs)
        return (sum(n * self.lpow(d - e) for n, e in xs), d)

    def mul(self, xs):
        n = gmpy2.mpz(1)
        d = 0
        for a, e in xs:
            if not a:
                return (gmpy2.mpz(0), 0)
            n *= a
            d += e
        return (n, d)

    def pow(self, x, e):
        return (x[0] ** e, x[1] * e) if x[0] else x

    def is_zero(self, x):
        return x[0] == 0

    def to_fraction(self, x) -> Fraction:
        return Fraction(int(x[0]), int(self.lpow(x[1])))


class _FracRing:
    def const(self, c):
        return Fraction(c)

    def add(self, xs):
        return sum(xs, Fraction(0))

    def mul(self, xs):
        out = Fraction(1)
        for x in xs:
            out *= x
            if not out:
                break
        return out

    def pow(self, x, e):
        return x ** e

    def is_zero(self, x):
        return x == 0


def _run(root: Expr, ring, leaves: Mapping[str, object], probe: Callable[[Expr], bool] | None = None, memo: dict | None = None):
    """Iterative memoized evaluation.

    With ``probe`` given, a product first asks it whether each factor might
    vanish; likely-zero factors are evaluated first so a zero factor ends
    the product without touching the others.  The probe only applies at
    the top level, never inside call bodies.
    """
    if memo is None:
        memo = {}
    stack = [root]
    while stack:
        node = stack[-1]
        key = id(node)
        if key in memo:
            stack.pop()
            continue
        op = node.op
        if op == "const":
            memo[key] = ring.const(node.data)
            stack.pop()
            continue
        if op == "var":
            try:
                memo[key] = leaves[node.data]
            except KeyError:
                raise KeyError(f"no value for variable {node.data!r}") from None
            stack.pop()
            continue
        if op == "mul" and probe is not None and len(node.args) > 1:
            memo[key] = _probed_product(node, ring, leaves, probe, memo)
            stack.pop()
            continue
        pending = [a for a in node.args if id(a) not in memo]
        if pending:
            stack.extend(reversed(pending))
            continue
        vals = [memo[id(a)] for a in node.args]
        if op == "add":
            memo[key] = ring.add(vals)
        elif op == "mul":
            memo[key] = ring.mul(vals)
        elif op == "pow":
            memo[key] = ring.pow(vals[0], node.data)
        else:
            fn = node.data
            memo[key] = _run(fn.body, ring, dict(zip(fn.params, vals)))
        stack.pop()
    return memo[id(root)]


def _probed_product(node: Expr, ring, leaves, probe, memo):
    first, later = [], []
    for a in node.args:
        (first if probe(a) else later).append(a)
    vals = []
    for a in first + later:
        v = _run(a, ring, leaves, probe, memo)
        if ring.is_zero(v):
            return v
        vals.append(v)
    return ring.mul(vals)


_PROBE_PRIME = (1 << 61) - 1


def _probe_modulus(dens: Iterable[int]) -> int:
    q = _PROBE_PRIME
    dens = list(dens)
    while not is_prime(q) or any(d % q == 0 for d in dens):
        q -= 2
    return q


def eval_mod(root: Expr, assignment: Mapping[str, object], q: int, memo: dict | None = None) -> int:
    """Value modulo the prime ``q``; every denominator must be a unit mod q.

    Pass the same ``memo`` to several calls at one point and q to share
    subexpression values between them.
    """
    ring = _ModRing(q)
    leaves = {k: ring.const(Q(v)) for k, v in assignment.items()}
    return _run(root, ring, leaves, memo=memo)


def evaluate(root: Expr, assignment: Mapping[str, object]) -> Fraction:
    """Exact value at a rational point.

    Large products are screened modulo a 61-bit prime first, so a factor
    that vanishes is found without evaluating its siblings exactly.
    """
    point = {k: Q(v) for k, v in assignment.items()}
    if not _all_int_consts(root):
        return _run(root, _FracRing(), point)
    L = 1
    for v in point.values():
        L = L * v.denominator // math.gcd(L, v.denominator)
    ring = _HomogRing(L)
    leaves = {k: (gmpy2.mpz(v.numerator * (L // v.denominator)), 1) for k, v in point.items()}
    q = _probe_modulus([L])
    mod_ring = _ModRing(q)
    mod_leaves = {k: mod_ring.const(v) for k, v in point.items()}
    mod_memo: dict[int, int] = {}

    def probe(e: Expr) -> bool:
        return _run(e, mod_ring, mod_leaves, memo=mod_memo) == 0

    return ring.to_fraction(_run(root, ring, leaves, probe))


def is_zero_at(root: Expr, assignment: Mapping[str, object]) -> bool:
    """Exact zero test; a nonzero residue mod a prime settles it cheaply."""
    point = {k: Q(v) for k, v in assignment.items()}
    dens = [v.denominator for v in point.values()]
    dens += [Fraction(n.data).denominator for n in _all_nodes(root) if n.op == "const"]
    q = _probe_modulus(dens)
    if eval_mod(root, point, q) != 0:
        return False
    return evaluate(root, point) == 0


def _all_nodes(root: Expr) -> list[Expr]:
    out = topo_order(root)
    for fn in functions_used(root):
        out.extend(topo_order(fn.body))
    return out


def _all_int_consts(root: Expr) -> bool:
    return all(
        not isinstance(n.data, Fraction) for n in _all_nodes(root) if n.op == "const"
    )


# -- rewriting ----------------------------------------------------------------
def substitute(root: Expr, mapping: Mapping[str, object]) -> Expr:
    """Replace variables by circuits (call arguments included, bodies not)."""
    images = {k: lift(v) for k, v in mapping.items()}
    memo: dict[int, Expr] = {}
    for n in topo_order(root):
        if n.op == "var":
            memo[id(n)] = images.get(n.data, n)
        elif n.op == "const":
            memo[id(n)] = n
        else:
            args = [memo[id(a)] for a in n.args]
            memo[id(n)] = _rebuild(n, args)
    return memo[id(root)]


def _rebuild(n: Expr, args: list[Expr]) -> Expr:
    if n.op == "add":
        return esum(args)
    if n.op == "mul":
        return eprod(args)
    if n.op == "pow":
        return power(args[0], n.data)
    return n.data(*args)


def clear_substitute(root: Expr, name: str, num, den) -> tuple[Expr, int]:
    """Return (E, d) with E = den**d * root(name -> num/den) a polynomial.

    ``d`` is the degree bound of ``root`` in ``name``.
    """
    num, den = lift(num), lift(den)
    memo: dict[int, tuple[Expr, int]] = {}
    for n in topo_order(root):
        op = n.op
        if op == "const":
            r = (n, 0) if n.data != 0 else (n, 0)
        elif op == "var":
            r = (num, 1) if n.data == name else (n, 0)
        elif op == "add":
            parts = [memo[id(a)] for a in n.args]
            d = max(p[1] for p in parts)
            r = (esum(e * power(den, d - k) for e, k in parts), d)
        elif op == "mul":
            parts = [memo[id(a)] for a in n.args]
            r = (eprod(e for e, _ in parts), sum(k for _, k in parts))
        elif op == "pow":
            e, k = memo[id(n.args[0])]
            r = (power(e, n.data), k * n.data)
        else:
            raise ValueError("cannot clear denominators through a call node")
        memo[id(n)] = r
    return memo[id(root)]


def expand(root: Expr) -> SparsePoly:
    """Full expansion; only sensible for small circuits."""
    memo: dict[int, SparsePoly] = {}
    for n in topo_order(root):
        op = n.op
        if op == "const":
            p = SparsePoly.const(n.data)
        elif op == "var":
            p = SparsePoly.var(n.data)
        elif op == "add":
            p = SparsePoly(())
            for a in n.args:
                p = p + memo[id(a)]
        elif op == "mul":
            p = SparsePoly.const(1)
            for a in n.args:
                p = p * memo[id(a)]
        elif op == "pow":
            p = memo[id(n.args[0])] ** n.data
        else:
            fn = n.data
            body = expand(fn.body)
            p = body.subs({v: memo[id(a)] for v, a in zip(fn.params, n.args)})
        memo[id(n)] = p
    return memo[id(root)]


def from_poly(p: SparsePoly) -> Expr:
    vs = [var(v) for v in p.vars]
    terms = []
    for e, c in p.terms.items():
        terms.append(eprod([const(c)] + [power(v, k) for v, k in zip(vs, e) if k]))
    return esum(terms)


# -- the DAG container and its JSON form --------------------------------------
class ExprDAG:
    """A root circuit plus the functions it calls."""

    __slots__ = ("root",)

    def __init__(self, root):
        self.root = lift(root)

    def degree_bound(self, var_degrees=None):
        return degree_bound(self.root, var_degrees)

    def evaluate(self, assignment):
        return evaluate(self.root, assignment)

    def is_zero_at(self, assignment) -> bool:
        return is_zero_at(self.root, assignment)

    def variables(self) -> set[str]:
        return free_vars(self.root)

    def node_count(self) -> int:
        return count_nodes(self.root)

    def functions(self) -> list[Function]:
        return functions_used(self.root)

    def expand(self) -> SparsePoly:
        return expand(self.root)

    def to_obj(self) -> dict:
        obj = _nodes_obj(self.root)
        fns = self.functions()
        if fns:
            obj["functions"] = [
                {"name": f.name, "params": list(f.params), **_nodes_obj(f.body)} for f in fns
            ]
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), separators=(",", ":"))

    @classmethod
    def from_obj(cls, obj) -> "ExprDAG":
        if not isinstance(obj, dict):
            raise PolyParseError("expected a DAG object", "$")
        fns: dict[str, Function] = {}
        for i, f in enumerate(obj.get("functions", [])):
            where = f"$.functions[{i}]"
            try:
                name, params = f["name"], f["params"]
            except (KeyError, TypeError):
                raise PolyParseError("function needs 'name' and 'params'", where) from None
            body = _parse_nodes(f, fns, where)
            try:
                fns[name] = Function(name, params, body)
            except ValueError as exc:
                raise PolyParseError(str(exc), where) from None
        return cls(_parse_nodes(obj, fns, "$"))

    @classmethod
    def from_json(cls, text: str) -> "ExprDAG":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolyParseError(exc.msg, exc.pos) from None
        return cls.from_obj(obj)


def _nodes_obj(root: Expr) -> dict:
    order = topo_order(root)
    index = {id(n): i for i, n in enumerate(order)}
    nodes = []
    for n in order:
        if n.op == "const":
            nodes.append({"op": "const", "value": format_rational(Fraction(n.data))})
        elif n.op == "var":
            nodes.append({"op": "var", "name": n.data})
        else:
            rec = {"op": n.op, "args": [index[id(a)] for a in n.args]}
            if n.op == "pow":
                rec["exp"] = n.data
            elif n.op == "call":
                rec["fn"] = n.data.name
            nodes.append(rec)
    return {"nodes": nodes, "root": index[id(root)]}


def _parse_nodes(obj: dict, fns: Mapping[str, Function], where: str) -> Expr:
    try:
        raw, root = obj["nodes"], obj["root"]
    except (KeyError, TypeError):
        raise PolyParseError("expected 'nodes' and 'root'", where) from None
    built: list[Expr] = []
    for i, rec in enumerate(raw):
        pos = f"{where}.nodes[{i}]"
        op = rec.get("op") if isinstance(rec, dict) else None
        if op not in _OPS:
            raise PolyParseError(f"unknown op {op!r}", pos)
        args = rec.get("args", [])
        if not isinstance(args, list) or any(
            not isinstance(a, int) or not 0 <= a < i for a in args
        ):
            raise PolyParseError("arguments must point to earlier nodes", pos)
        kids = [built[a] for a in args]
        try:
            if op == "const":
                node = const(parse_rational(rec["value"]))
            elif op == "var":
                node = var(rec["name"])
            elif op == "add":
                node = Expr("add", tuple(kids)) if len(kids) > 1 else esum(kids)
            elif op == "mul":
                node = Expr("mul", tuple(kids)) if len(kids) > 1 else eprod(kids)
            elif op == "pow":
                node = Expr("pow", tuple(kids), int(rec["exp"]))
            else:
                node = fns[rec["fn"]](*kids)
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise PolyParseError(f"malformed node: {exc}", pos) from None
        built.append(node)
    if not isinstance(root, int) or not 0 <= root < len(built):
        raise PolyParseError("root index out of range", f"{where}.root")
    return built[root]


def dag_degree_bound(d: ExprDAG):
    return d.degree_bound()


def dag_eval(d: ExprDAG, assignment: Mapping[str, object]) -> Fraction:
    return d.evaluate(assignment)
