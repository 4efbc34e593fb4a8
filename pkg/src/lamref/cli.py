"""Command-line front end.

    lamref check FILE [--dump-core]
    lamref run FILE [--heap HEAP]
    lamref denote FILE [--world W] [--store HEAP]
    lamref eq FILE1 FILE2 [--bound K]
    lamref diff FILE1 FILE2
    lamref laws [--suite NAME] [--bound K] [--seed N] [--count N]
    lamref gen [--seed N] [--size N] [--signature NAME]

Exit status is 0 iff nothing failed.
"""
from __future__ import annotations

import argparse
import json
import sys

from .denote import APPROX, EQUAL, compare_bounded, denote
from .initialisations import stores_over
from .lexer import ParseError
from .opsem import FuelExhausted, Stuck, run
from .signature import CONSTANT, EXAMPLE1, SignatureError
from .syntax import desugar, parse_heap, parse_surface_program, parse_world, print_term
from .types import show_type
from .typing import TypingError, check, ground, infer, typeable_at
from .worlds import inclusion

SIGNATURES = {"example1": EXAMPLE1, "constant": CONSTANT}
SUITES = ("monad", "hiding", "gs", "masking", "soundness")


class CliError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def load(path: str):
    """Parse and type a program file; returns ``(sig, layout, core, type)``."""
    text = _read(path)
    prog = parse_surface_program(text)
    try:
        ty = infer(prog.sig, prog.layout, {}, prog.term)
    except TypingError as e:
        where = prog.where(getattr(e, "subterm", None))
        at = f"{path}:{where[0]}:{where[1]}: " if where else f"{path}: "
        raise CliError(f"{at}type error: {e}") from None
    core = desugar(prog.term, prog.sig, prog.layout, {})
    return prog.sig, prog.layout, core, ty


def _render_heap(sig, layout, heap) -> list[str]:
    return [f"#{l} : {layout.sort_of(l)} = {print_term(heap[l])}" for l in sorted(heap)]


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    sig, layout, core, ty = load(args.file)
    if args.dump_core:
        print(print_term(core))
    print(show_type(ty))
    return 0


def cmd_run(args) -> int:
    sig, layout, core, ty = load(args.file)
    heap = parse_heap(args.heap, sig, layout) if args.heap else {}
    _store(sig, layout, heap)
    try:
        res = run(core, heap, args.fuel)
    except (Stuck, FuelExhausted) as e:
        raise CliError(f"evaluation failed: {e}") from None
    print(print_term(res.value))
    for line in _render_heap(sig, res.layout(layout), res.heap):
        print(line)
    return 0


def cmd_denote(args) -> int:
    sig, layout, core, ty = load(args.file)
    w = parse_world(args.world) if args.world else layout
    if not layout.extends(w):
        raise CliError(f"world {w} does not extend the layout {layout}")
    if args.store:
        sigma = _store(sig, w, parse_heap(args.store, sig, w))
    else:
        sigma = next(iter(stores_over(sig, w)))
    r = denote(sig, layout, core).component(inclusion(layout, w), sigma)
    print(f"store: {sigma}")
    print(r.render())
    return 0


def _store(sig, w, heap):
    from .denote import denote_heap
    if set(heap) != set(w.support):
        raise CliError(f"contents must be given for exactly the cells of {w}")
    for l, v in heap.items():
        try:
            check(sig, w, {}, v, sig.typeof(w.sort_of(l)))
        except TypingError as e:
            raise CliError(f"contents of #{l}: {e}") from None
    return denote_heap(sig, w, heap)


def _pair(args):
    p1, p2 = load(args.file1), load(args.file2)
    if p1[0] != p2[0] or p1[1] != p2[1]:
        raise CliError("the two programs must share signature and layout")
    # principal types may leave summands open; compare at a common instance
    for cand in (p1[3], p2[3]):
        ty = ground(p1[0], cand)
        if typeable_at(p1[0], p1[1], {}, p1[2], ty) and typeable_at(p1[0], p1[1], {}, p2[2], ty):
            return p1[:3] + (ty,), p2[:3] + (ty,)
    raise CliError(f"types differ: {show_type(p1[3])} vs {show_type(p2[3])}")


def cmd_eq(args) -> int:
    (sig, layout, t1, ty), (_, _, t2, _) = _pair(args)
    v = compare_bounded(sig, denote(sig, layout, t1), denote(sig, layout, t2), ty, args.bound)
    if args.json:
        out = {"status": v.status, "bound": args.bound, "reason": v.reason}
        if v.witness:
            h, s, r1, r2 = v.witness
            out.update(h=str(h), store=str(s), left=r1.render(), right=r2.render())
        print(json.dumps(out, indent=2))
    else:
        print(v.render())
    return {EQUAL: 0, APPROX: 3}.get(v.status, 1)


def cmd_diff(args) -> int:
    (sig, layout, t1, ty), (_, _, t2, _) = _pair(args)
    from .harness import obs_diff
    found = obs_diff(sig, layout, t1, t2, ty, args.budget)
    if found is None:
        print("no distinguishing context found")
        return 1
    ctx, heap, v1, v2 = found
    print(f"context: {ctx}")
    print("heap:")
    for line in _render_heap(sig, layout, heap):
        print("  " + line)
    print(f"left:  {print_term(v1)}")
    print(f"right: {print_term(v2)}")
    return 0


def run_suite(name: str, args):
    """Yield ``(signature name, report)`` for one suite."""
    from . import harness, laws
    names = [args.signature] if args.signature else ["constant", "example1"]
    b = args.bound
    for sname in names:
        sig = SIGNATURES[sname]
        if name == "monad":
            reps = [laws.check_p_laws(sig, b or 2), laws.check_t_laws(sig, b or 2),
                    laws.check_strength_laws(sig, b or 2), laws.check_dstrength_order(sig, b or 2),
                    laws.check_end_condition(sig, b or 2)]
        elif name == "hiding":
            reps = [laws.check_hiding_axioms(sig, b or 2), laws.check_invertible_unit(sig, b or 3),
                    laws.check_invertible_strength(sig, b or 2)]
        elif name == "gs":
            reps = [harness.equations_suite(sig, b or 3)]
        elif name == "masking":
            reps = [harness.check_constant_at_zero(sig, args.count, args.seed)]
        else:
            reps = [harness.soundness_suite([sig], args.count, args.seed, bound=b or 2,
                                            first_order=args.first_order)]
        for r in reps:
            yield sname, r


def cmd_laws(args) -> int:
    names = [args.suite] if args.suite else list(SUITES)
    results = []
    for name in names:
        for sname, rep in run_suite(name, args):
            rep.suite = f"{rep.suite} ({sname})"
            results.append(rep)
    if args.json:
        print(json.dumps([r.as_dict() for r in results], indent=2, sort_keys=True))
    else:
        for r in results:
            print(r.render())
    return 0 if all(r.ok for r in results) else 1


def cmd_gen(args) -> int:
    from .generator import gen_well_typed
    sig = SIGNATURES[args.signature or "example1"]
    layout, t, ty = gen_well_typed(sig, args.size, args.seed, first_order=args.first_order)
    print(sig.render())
    print("layout {" + ", ".join(f"#{l}:{s}" for l, s in layout) + "}")
    print(print_term(t))
    return 0


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamref", description="λ-ref with full ground references: "
                                "interpreter, possible-worlds semantics and law checker")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="print the inferred type")
    c.add_argument("file")
    c.add_argument("--dump-core", action="store_true", help="also print the desugared core term")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("run", help="evaluate and print the value and final heap")
    c.add_argument("file")
    c.add_argument("--heap", help="initial heap, e.g. '{#0 = true, #1 = false}'")
    c.add_argument("--fuel", type=int, default=10**6)
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("denote", help="print one component of the denotation")
    c.add_argument("file")
    c.add_argument("--world", help="world extending the layout, e.g. '{#0:data, #1:list}'")
    c.add_argument("--store", help="store over the world, same syntax as --heap")
    c.set_defaults(func=cmd_denote)

    for name, fn, hlp in (("eq", cmd_eq, "bounded denotational equality"),
                          ("diff", cmd_diff, "search for a distinguishing context")):
        c = sub.add_parser(name, help=hlp)
        c.add_argument("file1")
        c.add_argument("file2")
        c.add_argument("--bound", type=int, default=2, help="largest world, in cells")
        c.add_argument("--budget", type=int, default=2000, help="heaps tried per observer")
        c.add_argument("--json", action="store_true")
        c.set_defaults(func=fn)

    c = sub.add_parser("laws", help="run the law and theorem suites")
    c.add_argument("--suite", choices=SUITES)
    c.add_argument("--signature", choices=sorted(SIGNATURES))
    c.add_argument("--bound", type=int, help="world bound (suite default if omitted)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--count", type=int, default=100, help="generated programs per signature")
    c.add_argument("--first-order", action="store_true",
                   help="soundness: only generate programs of first-order type")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_laws)

    c = sub.add_parser("gen", help="print a generated well-typed program")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--size", type=int, default=12)
    c.add_argument("--signature", choices=sorted(SIGNATURES))
    c.add_argument("--first-order", action="store_true")
    c.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ParseError, SignatureError, TypingError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
