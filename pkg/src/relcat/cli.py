"""Command-line experiment harness.

Subcommands: build (stage graph export), scott (family generation + checks),
backforth (scramble and reconstruct), reject (stage-by-stage rejection status
of one formula), etree (E_t evolution), decode (C / D-complement recovery
report).  Exit codes: 0 success, 1 verification failure, 2 malformed input.
"""

from __future__ import annotations

import argparse
import sys

from . import coding, degree_lab, scott
from .coding import CodingInstance, InstanceFormatError
from .formulas import from_sexpr, rejected_by, to_sexpr
from .structures import export


def _load(spec: str) -> CodingInstance:
    if spec == "inst1":
        return coding.inst1()
    return coding.load_instance(spec)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_build(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    if args.stage is None:
        g = coding.build_symbolic(inst)
        world = scott.generate_scott_family(g, 0).world  # truncation only
        graph = world
    else:
        graph = coding.build_stage(inst, args.stage).graph
    fmt = {"dot": "dot", "json": "adjacency-json"}.get(args.format, args.format)
    _write(export(graph, fmt), args.out)
    return 0


def _cmd_scott(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    g = coding.build_symbolic(inst)
    fam = scott.generate_scott_family(g, args.tuple_bound, budget=args.budget)
    v1 = scott.check_condition1(fam, g, args.tuple_bound)
    v2 = scott.check_condition2(fam, g, args.tuple_bound)
    print(f"entries: {len(fam.entries)}")
    print(f"condition1 violations: {len(v1)}")
    print(f"condition2 violations: {len(v2)}")
    if args.out:
        lines = [f"(param {p.label})" for p in fam.parameters]
        lines += [f"{e.arity} {to_sexpr(e.formula)}" for e in fam.entries]
        _write("\n".join(lines) + "\n", args.out)
    return 0 if not v1 and not v2 else 1


def _cmd_backforth(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    stage = coding.build_stage(inst, args.stage)
    a = stage.graph
    b, perm = coding.scramble(a, args.seed)
    fam = scott.family_for_finite_graph(a, [a.vertices[0]])
    try:
        mapping = scott.back_and_forth(a, b, fam, [perm[0]], steps=args.steps)
    except scott.NoExtensionError as e:
        print(f"no extension: {e}")
        return 1
    if args.steps is None:
        if scott.verify_isomorphism(mapping, a, b):
            print("isomorphism verified")
            return 0
        print("isomorphism check failed")
        return 1
    print(f"partial map of size {len(mapping)}")
    return 0


def _cmd_reject(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    try:
        phi = from_sexpr(args.formula)
    except ValueError as e:
        print(f"bad formula: {e}", file=sys.stderr)
        return 2
    g = coding.build_symbolic(inst)
    for s in range(inst.stage_bound + 1):
        stage = coding.build_stage(inst, s)
        try:
            status = "rejected" if rejected_by(phi, stage, g.parameters) else "open"
        except Exception:
            status = "too-early"
        print(f"stage {s:3d}: {status}")
    return 0


def _cmd_etree(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    g = coding.build_symbolic(inst)
    fam = scott.generate_scott_family(g, 1, budget=args.budget)
    if args.empty_v:
        v = degree_lab.OperatorTable.empty(inst.stage_bound)
        from .approx import DeltaApprox

        d = DeltaApprox.constant([0] * inst.x_bound, inst.stage_bound + 1)
    else:
        v, d = degree_lab.honest_scenario(inst, fam)
    bound = args.bound if args.bound is not None else inst.stage_bound
    prev: frozenset[int] = frozenset()
    for t in range(bound + 1):
        et = degree_lab.compute_E_t(v, d, inst, fam, t)
        new = sorted(et - prev)
        print(f"t={t:3d}  |E_t|={len(et):3d}  new={new}")
        prev = et
    return 0


def _cmd_decode(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    g = coding.build_symbolic(inst)
    fam = scott.generate_scott_family(g, 1, budget=args.budget)
    rows = degree_lab.decode_report(fam, inst)
    ok = True
    print("x  C(dec) C(true)  notD(dec) notD(true)")
    for r in rows:
        good = r["c_decoded"] == r["c_truth"] and r["d_comp_decoded"] == r["d_comp_truth"]
        ok = ok and good
        print(
            f"{r['x']}  {r['c_decoded']!s:6} {r['c_truth']!s:7}  "
            f"{r['d_comp_decoded']!s:9} {r['d_comp_truth']!s:10} {'' if good else ' MISMATCH'}"
        )
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="relcat")
    parser.add_argument("--instance", default="inst1", help="instance file or 'inst1'")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=int, default=1)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", default="dot", choices=["dot", "json", "text"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="export a stage graph or the limit truncation")
    p.add_argument("--stage", type=int, default=None)
    p.set_defaults(fn=_cmd_build)

    p = sub.add_parser("scott", help="generate a family and run both checks")
    p.add_argument("--tuple-bound", type=int, default=2)
    p.set_defaults(fn=_cmd_scott)

    p = sub.add_parser("backforth", help="scramble a stage graph and reconstruct")
    p.add_argument("--stage", type=int, default=3)
    p.add_argument("--steps", type=int, default=None)
    p.set_defaults(fn=_cmd_backforth)

    p = sub.add_parser("reject", help="rejection status of a formula across stages")
    p.add_argument("formula", help="s-expression formula")
    p.set_defaults(fn=_cmd_reject)

    p = sub.add_parser("etree", help="E_t evolution table")
    p.add_argument("--empty-v", action="store_true")
    p.add_argument("--bound", type=int, default=None)
    p.set_defaults(fn=_cmd_etree)

    p = sub.add_parser("decode", help="recover C and the D-complement vs ground truth")
    p.set_defaults(fn=_cmd_decode)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InstanceFormatError as e:
        print(f"malformed instance: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"missing file: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
