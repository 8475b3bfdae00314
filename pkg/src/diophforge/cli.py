"""Command-line front end.

Exit codes: 0 when every checked invariant holds, 1 on a violation,
2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .campaign import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, CampaignConfig, cache_dir, run_campaign
from .exact import format_rational, parse_rational


class UsageError(Exception):
    pass


def _rat(text: str):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from e


def _emit(args, obj, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(obj, sort_keys=True))
    else:
        print(text)


def _fmt(x) -> str:
    return format_rational(x) if x is not None else "none"


# -- jk -----------------------------------------------------------------------
def cmd_jk(args) -> int:
    from . import relcomb

    if args.action == "build":
        if args.k is None:
            raise UsageError("jk build needs --k")
        bundle = relcomb.build_Jk(args.k, expand=args.expand)
        obj = {
            "k": args.k,
            "nodes": bundle.dag.node_count(),
            "degree_bound": int(bundle.dag.degree_bound()),
        }
        if bundle.Jk is not None:
            obj["terms"] = len(bundle.Jk.terms)
            obj["total_degree"] = bundle.Jk.total_degree()
        if args.out:
            payload = bundle.Jk.to_obj() if (args.expand and bundle.Jk is not None) else bundle.dag.to_obj()
            Path(args.out).write_text(json.dumps(payload, separators=(",", ":")))
            obj["out"] = args.out
        _emit(args, obj, "\n".join(f"{k}: {v}" for k, v in obj.items()))
        return EXIT_OK
    A = args.values
    if not A:
        raise UsageError(f"jk {args.action} needs at least one rational")
    if any(a == 0 for a in A):
        raise UsageError("arguments must be nonzero")
    if args.action == "decide":
        v = relcomb.jk_decide(A)
        _emit(args, {"decide": v}, "true" if v else "false")
    else:
        if not relcomb.jk_decide(A):
            _emit(args, {"witness": None}, "none")
            return EXIT_OK
        x = relcomb.jk_witness(A)
        if relcomb.jk_eval(A, x) != 0:
            print(f"witness {_fmt(x)} does not evaluate to zero", file=sys.stderr)
            return EXIT_VIOLATION
        _emit(args, {"witness": _fmt(x)}, _fmt(x))
    return EXIT_OK


# -- set ----------------------------------------------------------------------
def cmd_set(args) -> int:
    from .goodsets import LocalSetDescriptor

    try:
        desc = LocalSetDescriptor(args.tag, args.a, args.b, args.c)
    except ValueError as e:
        raise UsageError(str(e)) from e
    if args.action == "member":
        if args.t is None:
            raise UsageError("set member needs --t")
        verdict = desc.oracle(args.t)
        obj = {"tag": args.tag, "t": _fmt(args.t), "member": verdict}
        text = "true" if verdict else "false"
        if args.witness_height and verdict:
            w = desc.witness(args.t, args.witness_height)
            obj["witness"] = None if w is None else {
                "clause": w.index, "assignment": {k: _fmt(v) for k, v in sorted(w.assignment.items())}
            }
            if w is not None:
                text += "\nclause " + str(w.index) + ": " + ", ".join(
                    f"{k}={_fmt(v)}" for k, v in sorted(w.assignment.items())
                )
        _emit(args, obj, text)
        return EXIT_OK
    F = desc.build()
    F.audit()
    if args.out:
        Path(args.out).write_text(F.to_json(form=args.form))
    obj = {"tag": args.tag, "m": F.m, "clauses": len(F.clauses), "max_ell": F.max_ell(False)}
    if args.out:
        obj["out"] = args.out
    _emit(args, obj, "\n".join(f"{k}: {v}" for k, v in obj.items()))
    return EXIT_OK


# -- assembly -----------------------------------------------------------------
def cmd_assemble(args) -> int:
    from .assembly import assemble

    fp = assemble(cache_dir())
    if args.out:
        Path(args.out).write_text(fp.dag.to_json())
    obj = {
        "m": fp.rep.m,
        "clauses": len(fp.rep.formula.clauses),
        "bound_variables": len(fp.bound_variables),
        "max_ell": fp.rep.max_ell(),
        "nodes": fp.dag.node_count(),
    }
    if args.out:
        obj["out"] = args.out
    _emit(args, obj, "\n".join(f"{k}: {v}" for k, v in obj.items()))
    return EXIT_OK if obj["m"] == 30 and obj["bound_variables"] == 32 else EXIT_VIOLATION


def cmd_certify(args) -> int:
    from . import circuit as C
    from .assembly import certify_degree, combine_to_P, build_notZ, degree_report_from_dag

    try:
        if args.file:
            rep = degree_report_from_dag(C.ExprDAG.from_json(Path(args.file).read_text()))
        else:
            rep = certify_degree(combine_to_P(build_notZ()))
    except AssertionError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VIOLATION
    _emit(args, {"degree_bound": rep.bound, "report": rep.text}, rep.text)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .assembly import assemble, notZ_witness, p_witness, semantic_decide_notZ, vanishes_at

    t = args.t
    truth = t.denominator != 1
    verdict = semantic_decide_notZ(t)
    obj = {"t": _fmt(t), "ground_truth": truth, "oracle_verdict": verdict}
    status = EXIT_OK if truth == verdict else EXIT_VIOLATION
    if truth:
        fp = assemble(cache_dir())
        w, route = notZ_witness(t, fp.rep, phi_height=args.height, height=args.witness_height)
        obj["route"] = route
        if w is None:
            obj["witness_status"] = "unknown"
        else:
            vec = p_witness(fp, t, w)
            zero = vanishes_at(fp, vec)
            obj["witness_status"] = "found" if zero else "invalid"
            obj["clause"] = w.index
            obj["vector"] = {k: _fmt(v) for k, v in sorted(vec.items(), key=lambda kv: (kv[0] != "t", len(kv[0]), kv[0]))}
            obj["P_zero"] = zero
            if not zero:
                status = EXIT_VIOLATION
    else:
        obj["witness_status"] = "not-applicable"
    lines = [f"{k}: {v}" for k, v in obj.items() if k != "vector"]
    if "vector" in obj:
        lines.append("vector: " + " ".join(f"{k}={v}" for k, v in obj["vector"].items()))
    _emit(args, obj, "\n".join(lines))
    return status


def cmd_campaign(args) -> int:
    cfg = CampaignConfig(
        samples=args.samples,
        height=args.height,
        witness_height=args.witness_height,
        factor_budget=args.factor_budget,
        seed=args.seed,
        jobs=args.jobs,
        out=args.out,
        check_p=args.check_p,
        timings=args.timings,
        integers_only=args.integers_only,
    )
    try:
        cfg.validate()
    except ValueError as e:
        raise UsageError(str(e)) from e
    report = run_campaign(cfg)
    c = report.counts
    _emit(args, {"counts": c, "ok": report.ok}, "\n".join(f"{k}: {v}" for k, v in c.items()))
    return EXIT_OK if report.ok else EXIT_VIOLATION


# -- local symbols --------------------------------------------------------------
def cmd_hilbert(args) -> int:
    from .local import INF, delta_set, hilbert

    if args.a == 0 or args.b == 0:
        raise UsageError("Hilbert symbol needs nonzero arguments")
    if args.place is None:
        d = list(delta_set(args.a, args.b))
        _emit(args, {"delta": d, "inf": hilbert(args.a, args.b, INF)}, json.dumps(d))
        return EXIT_OK
    place = INF if args.place in ("inf", "oo", "infinity") else int(args.place)
    try:
        s = hilbert(args.a, args.b, place)
    except ValueError as e:
        raise UsageError(str(e)) from e
    _emit(args, {"symbol": s}, str(s))
    return EXIT_OK


def _three_reason(r) -> str:
    if r < 0:
        return "negative"
    n = r.numerator * r.denominator
    k = 0
    while n % 4 == 0:
        n //= 4
        k += 1
    head = f"{_fmt(r)} ≡ 7 mod 8" if k == 0 and r.denominator == 1 else f"{n} ≡ 7 mod 8 after removing 4^{k}"
    return head


def cmd_squares(args) -> int:
    from .local import four_squares_witness, three_squares_witness

    r = args.value
    w = three_squares_witness(r) if args.kind == "three" else four_squares_witness(r)
    if w is None:
        reason = _three_reason(r) if args.kind == "three" else "negative"
        _emit(args, {"witness": None, "reason": reason}, f"none ({reason})")
    else:
        _emit(args, {"witness": [_fmt(x) for x in w]}, " ".join(_fmt(x) for x in w))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")

    p = argparse.ArgumentParser(prog="diophforge", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    jk = sub.add_parser("jk", parents=[common], help="relation-combining polynomials")
    jk.add_argument("action", choices=["build", "decide", "witness"])
    jk.add_argument("values", nargs="*", type=_rat, metavar="A")
    jk.add_argument("--k", type=int)
    jk.add_argument("--expand", action="store_true", default=None, help="also expand to a sparse polynomial")
    jk.add_argument("--out")
    jk.set_defaults(func=cmd_jk)

    st = sub.add_parser("set", parents=[common], help="good sets: membership and formulas")
    st.add_argument("action", choices=["member", "formula"])
    st.add_argument("--tag", required=True)
    st.add_argument("--a", type=_rat)
    st.add_argument("--b", type=_rat)
    st.add_argument("--c", type=_rat)
    st.add_argument("--t", type=_rat)
    st.add_argument("--witness-height", type=int, default=0, help="also search a clause witness")
    st.add_argument("--form", choices=["poly", "dag"], default="poly")
    st.add_argument("--out")
    st.set_defaults(func=cmd_set)

    asm = sub.add_parser("assemble", parents=[common], help="build the 32-unknown polynomial")
    asm.add_argument("--out")
    asm.set_defaults(func=cmd_assemble)

    cd = sub.add_parser("certify-degree", parents=[common], help="degree accounting for P")
    cd.add_argument("file", nargs="?")
    cd.set_defaults(func=cmd_certify)

    vf = sub.add_parser("verify", parents=[common], help="end-to-end check at one t")
    vf.add_argument("--t", type=_rat, required=True)
    vf.add_argument("--height", type=int, default=31, help="height bound for (u, v)")
    vf.add_argument("--witness-height", type=int, default=40)
    vf.set_defaults(func=cmd_verify)

    cp = sub.add_parser("campaign", parents=[common], help="seeded random campaign")
    cp.add_argument("--samples", type=int, default=100)
    cp.add_argument("--height", type=int, default=100)
    cp.add_argument("--witness-height", type=int, default=31)
    cp.add_argument("--factor-budget", type=int, default=200_000)
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--jobs", type=int, default=1)
    cp.add_argument("--out", "--report", dest="out")
    cp.add_argument("--check-p", action="store_true", help="evaluate P exactly at each witness")
    cp.add_argument("--timings", action="store_true")
    cp.add_argument("--integers-only", action="store_true")
    cp.set_defaults(func=cmd_campaign)

    hb = sub.add_parser("hilbert", parents=[common], help="Hilbert symbol, or the ramified primes")
    hb.add_argument("a", type=_rat)
    hb.add_argument("b", type=_rat)
    hb.add_argument("--place")
    hb.set_defaults(func=cmd_hilbert)

    sq = sub.add_parser("squares", parents=[common], help="sums of three or four squares")
    sq.add_argument("kind", choices=["three", "four"])
    sq.add_argument("value", type=_rat)
    sq.set_defaults(func=cmd_squares)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
