"""Theorem suites: soundness, equations, masking, and observational testing."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .denote import (APPROX, EQUAL, NOT_EQUAL, Verdict, _Cmp, _worst, compare_reps, denote,
                     denote_heap, denote_term, denote_value, is_first_order)
from .initialisations import CoendRep, Heaplet, gc_canonical, store, stores_over
from .opsem import FuelExhausted, Stuck, run
from .signature import Signature
from .syntax import Inj, Loc, Pair, Star, Term, parse_term, print_term
from .types import TArrow, TProd, TRef, TSum, TUnit, Type, refs_of, show_type
from .typing import TypingError, check, infer
from .worlds import (EMPTY, Injection, SemValue, VInj, VLoc, VPair, VUnit, World, enumerate_worlds,
                     identity, inclusion, injections, interp_type)


# ---------------------------------------------------------------- reports


@dataclass
class TestReport:
    __test__ = False  # not a pytest class despite the name

    suite: str
    tried: int = 0
    failures: list[dict] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    undecided: int = 0  # instances the bounded comparison could only approximate

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, **witness) -> None:
        self.failures.append({k: str(v) for k, v in witness.items()})

    def merge(self, other: TestReport) -> TestReport:
        self.tried += other.tried
        self.undecided += other.undecided
        self.failures.extend(other.failures)
        self.notes.extend(n for n in other.notes if n not in self.notes)
        return self

    def as_dict(self) -> dict:
        return {"suite": self.suite, "tried": self.tried, "failures": self.failures,
                "bounds": self.bounds, "notes": self.notes, "undecided": self.undecided,
                "ok": self.ok}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def render(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        bounds = ", ".join(f"{k}={v}" for k, v in sorted(self.bounds.items()))
        lines = [f"[{status}] {self.suite}: {self.tried} instances, {len(self.failures)} failures"
                 + (f", {self.undecided} undecided" if self.undecided else "")
                 + (f" ({bounds})" if bounds else "")]
        for f in self.failures[:5]:
            lines.append("  - " + "; ".join(f"{k}: {v}" for k, v in f.items()))
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


# ---------------------------------------------------------------- conversions


def value_to_term(v: SemValue) -> Term:
    match v:
        case VLoc(l):
            return Loc(l)
        case VInj(i, x):
            return Inj(i, value_to_term(x))
        case VPair(a, b):
            return Pair(value_to_term(a), value_to_term(b))
        case VUnit():
            return Star()
    raise TypeError(f"not a first-order value: {v}")


def store_to_heap(sigma: Heaplet) -> dict[int, Term]:
    return {l: value_to_term(v) for l, v in sigma.items()}


def heaps_over(sig: Signature, w: World) -> Iterator[dict[int, Term]]:
    for sigma in stores_over(sig, w):
        yield store_to_heap(sigma)


# ---------------------------------------------------------------- soundness


def layout_extensions(sig: Signature, w: World, bound: int) -> list[World]:
    """Layouts ``w' >= w`` with at most ``bound`` cells (contiguous beyond ``w``)."""
    out = []
    extra = max(0, bound - len(w))
    free = itertools.count(0)
    slots = []
    for i in free:
        if len(slots) == extra:
            break
        if i not in w:
            slots.append(i)
    for k in range(extra + 1):
        for sorts in itertools.product(sig.sorts, repeat=k):
            out.append(World.of({**w.as_dict(), **dict(zip(slots, sorts))}))
    return out


def check_soundness(sig: Signature, w: World, t: Term, ty: Type, bound: int = 2,
                    fuel: int = 10**6) -> TestReport:
    """Run ``t`` from every heap over every ``w' >= w`` within the bound and
    compare the final configuration with the denotation."""
    rep = TestReport("soundness", bounds={"world": bound})
    m = denote(sig, w, t)
    for w1 in layout_extensions(sig, w, bound):
        incl = inclusion(w, w1)
        for sigma in stores_over(sig, w1):
            rep.tried += 1
            heap = store_to_heap(sigma)
            try:
                res = run(t, heap, fuel)
            except (Stuck, FuelExhausted) as e:
                rep.fail(term=print_term(t), layout=w1, heap=sigma, error=e)
                continue
            w2 = res.layout(w1)
            left = m.component(incl, sigma)
            right = CoendRep(w1, inclusion(w1, w2), denote_value(sig, w2, res.value, identity(w2), {}),
                             denote_heap(sig, w2, res.heap))
            verdict = compare_reps(sig, left, right, ty)
            if verdict.status == APPROX:
                rep.undecided += 1
                if verdict.reason not in rep.notes:
                    rep.notes.append(verdict.reason)
            elif verdict.status != EQUAL:
                rep.fail(term=print_term(t), layout=w1, heap=sigma, verdict=verdict.status,
                         denotation=left.render(), operational=gc_canonical(right).render())
    return rep


# ---------------------------------------------------------------- open terms


def envs_over(sig: Signature, ctx: dict[str, Type], w: World) -> Iterator[dict[str, SemValue]]:
    names = sorted(ctx)
    choices = [interp_type(sig, ctx[x], w) for x in names]
    for vals in itertools.product(*choices):
        yield dict(zip(names, vals))


def compare_open(sig: Signature, w: World, ctx: dict[str, Type], t1: Term, t2: Term, ty: Type,
                 bound: int = 3) -> Verdict:
    """Compare two open terms at every location environment into a world of at
    most ``bound`` cells, every identifier environment and every store."""
    if not all(is_first_order(t) for t in ctx.values()):
        raise ValueError("identifier environments are only enumerated at first-order types")
    cmp = _Cmp(sig)
    status = EQUAL
    for w1 in enumerate_worlds(sig, bound):
        for h in injections(w, w1):
            for env in envs_over(sig, ctx, w1):
                m1 = denote_term(sig, w, t1, h, env)
                m2 = denote_term(sig, w, t2, h, env)
                for sigma in stores_over(sig, w1):
                    r1, r2 = m1.at(sigma), m2.at(sigma)
                    v = cmp.reps(r1, r2, ty, cmp.depth)
                    if v == NOT_EQUAL:
                        env_s = ", ".join(f"{x}={val}" for x, val in env.items())
                        return Verdict(NOT_EQUAL, (h, sigma, r1, r2), reason=f"env {{{env_s}}}",
                                       bound=bound)
                    status = _worst(status, v)
    return Verdict(status, reason="; ".join(sorted(set(cmp.notes))) if status == APPROX else "",
                   bound=bound)


# ---------------------------------------------------------------- equations


@dataclass(frozen=True)
class EquationSchema:
    """Two term templates over placeholder sorts ``{k1}``, ``{k2}``.

    The layout gives ``#0``, ``#1``, ... the listed sorts, and the context
    binds each identifier to the content type of a listed sort.
    """
    name: str
    layout: tuple[str, ...]          # sort placeholders for #0, #1, ...
    ctx: tuple[tuple[str, str], ...]  # identifier -> placeholder whose content type it has
    left: str
    right: str
    source: str = "reconstructed"
    expect_equal: bool = True

    def placeholders(self) -> list[str]:
        seen: list[str] = []
        for p in list(self.layout) + [p for _, p in self.ctx] + _fields(self.left) + _fields(self.right):
            if p not in seen:
                seen.append(p)
        return seen


def _fields(text: str) -> list[str]:
    import string
    return [f for _, f, _, _ in string.Formatter().parse(text) if f]


@dataclass(frozen=True)
class Instance:
    schema: EquationSchema
    sorts: dict
    layout: World
    ctx: dict
    left: Term
    right: Term
    ty: Type

    def describe(self) -> str:
        return f"{self.schema.name} with {self.sorts}: {print_term(self.left)}  ==  {print_term(self.right)}"


def instantiate(schema: EquationSchema, sig: Signature) -> Iterator[Instance]:
    names = schema.placeholders()
    for choice in itertools.product(sig.sorts, repeat=len(names)):
        sorts = dict(zip(names, choice))
        layout = World(tuple((i, sorts[p]) for i, p in enumerate(schema.layout)))
        ctx = {x: sig.typeof(sorts[p]) for x, p in schema.ctx}
        try:
            left = parse_term(schema.left.format(**sorts), sig, layout, ctx)
            right = parse_term(schema.right.format(**sorts), sig, layout, ctx)
            ty = infer(sig, layout, ctx, left)
            check(sig, layout, ctx, right, ty)
            check(sig, layout, ctx, left, ty)
        except TypingError:
            continue
        yield Instance(schema, sorts, layout, ctx, left, right, ty)


GS6 = EquationSchema(
    "GS6: commuting assignments", ("{k1}", "{k2}"), (("v1", "k1"), ("v2", "k2")),
    "#0 := v1; #1 := v2", "#1 := v2; #0 := v1", source="stated")

EQUATIONS: tuple[EquationSchema, ...] = (
    GS6,
    EquationSchema("lookup-lookup", ("{k1}",), (),
                   "(!#0, !#0)", "let x = !#0 in (x, x)"),
    EquationSchema("update-lookup", ("{k1}",), (("v", "k1"),),
                   "#0 := v; !#0", "#0 := v; v"),
    EquationSchema("update-update", ("{k1}",), (("v1", "k1"), ("v2", "k1")),
                   "#0 := v1; #0 := v2", "#0 := v2"),
    EquationSchema("lookup-update", ("{k1}",), (),
                   "#0 := !#0", "()"),
    EquationSchema("lookup-lookup commute", ("{k1}", "{k2}"), (),
                   "(!#0, !#1)", "let y = !#1 in let x = !#0 in (x, y)"),
    EquationSchema("update-lookup commute", ("{k1}", "{k2}"), (("v", "k1"),),
                   "#0 := v; !#1", "let y = !#1 in #0 := v; y"),
    EquationSchema("allocation discard", (), (("v", "k1"),),
                   "let x = ref {k1} v in ()", "()"),
    EquationSchema("allocation exchange", (), (("v1", "k1"), ("v2", "k2")),
                   "let x = ref {k1} v1 in let y = ref {k2} v2 in (x, y)",
                   "let y = ref {k2} v2 in let x = ref {k1} v1 in (x, y)"),
    EquationSchema("allocation-lookup commute", ("{k2}",), (("v", "k1"),),
                   "let x = ref {k1} v in (x, !#0)", "let y = !#0 in let x = ref {k1} v in (x, y)"),
    EquationSchema("allocation-update commute", ("{k2}",), (("v", "k1"), ("u", "k2")),
                   "let x = ref {k1} v in #0 := u; x", "#0 := u; ref {k1} v"),
    EquationSchema("allocate-lookup", (), (("v", "k1"),),
                   "let x = ref {k1} v in (x, !x)", "let x = ref {k1} v in (x, v)"),
    EquationSchema("allocate-update", (), (("v1", "k1"), ("v2", "k1")),
                   "let x = ref {k1} v1 in x := v2; x", "ref {k1} v2"),
    EquationSchema("simultaneous allocation", (), (("v1", "k1"), ("v2", "k2")),
                   "new {{x:{k1} = v1, y:{k2} = v2}} in (x, y)",
                   "let x = ref {k1} v1 in let y = ref {k2} v2 in (x, y)"),
)

NEGATIVE_CONTROL = EquationSchema(
    "negative control: assignment is invisible", ("{k1}",), (("v", "k1"),),
    "#0 := v; !#0", "!#0", source="deliberately wrong", expect_equal=False)


def check_equation(schema: EquationSchema, sig: Signature, bound: int = 3) -> TestReport:
    rep = TestReport(f"equation {schema.name}", bounds={"world": bound})
    rep.notes.append(f"source: {schema.source}")
    for inst in instantiate(schema, sig):
        rep.tried += 1
        verdict = compare_open(sig, inst.layout, inst.ctx, inst.left, inst.right, inst.ty, bound)
        if verdict.status != EQUAL:
            witness = verdict.render()
            rep.fail(instance=inst.describe(), verdict=witness)
    if rep.tried == 0:
        rep.fail(schema=schema.name, error="no well-typed instance")
    return rep


def check_negative(schema: EquationSchema, sig: Signature, bound: int = 3) -> tuple[bool, list[str]]:
    """Whether a wrong schema is refuted, i.e. some instance is shown
    not-equal; returns the witnesses of the refuted instances.

    Instances may be genuinely equal within a small bound (when the bound
    leaves only one choice of contents), so not every instance need fail.
    """
    witnesses = []
    for inst in instantiate(schema, sig):
        v = compare_open(sig, inst.layout, inst.ctx, inst.left, inst.right, inst.ty, bound)
        if v.status == NOT_EQUAL:
            witnesses.append(f"{inst.describe()}\n{v.render()}")
    return bool(witnesses), witnesses


# ---------------------------------------------------------------- masking


def is_constant_type(ty: Type) -> bool:
    return is_first_order(ty) and not refs_of(ty)


@dataclass(frozen=True)
class MaskingResult:
    ok: bool
    value: SemValue | None
    rep: CoendRep


def check_masking(sig: Signature, t: Term, ty: Type | None = None) -> TestReport:
    """A closed program at the empty layout whose type mentions no references
    denotes a pure value: its component at the empty store keeps no cells."""
    ty = ty if ty is not None else infer(sig, EMPTY, {}, t)
    rep = TestReport("masking")
    if not is_constant_type(ty):
        rep.fail(term=print_term(t), error=f"type {show_type(ty)} is not constant")
        return rep
    rep.tried = 1
    r = mask(sig, t)
    if r.rep.priv != EMPTY:
        rep.fail(term=print_term(t), residual=r.rep.render())
    else:
        rep.notes.append(f"{print_term(t)} is pure {r.value}")
    return rep


def mask(sig: Signature, t: Term) -> MaskingResult:
    from .initialisations import EMPTY_STORE
    r = denote(sig, EMPTY, t).at(EMPTY_STORE)
    return MaskingResult(r.priv == EMPTY, r.payload if r.priv == EMPTY else None, r)


def check_constant_at_zero(sig: Signature, count: int = 100, seed: int = 0, size: int = 10,
                           bound: int = 2) -> TestReport:
    """Closed boolean programs at the empty layout denote ``return b``."""
    from .denote import compare_bounded, t_return
    from .generator import gen_of_type
    rep = TestReport("constant at 0", bounds={"world": bound, "size": size})
    booleans = TSum(TUnit(), TUnit())
    for i in range(count):
        t = gen_of_type(sig, EMPTY, booleans, size, seed + i)
        rep.tried += 1
        r = mask(sig, t)
        if not r.ok:
            rep.fail(term=print_term(t), residual=r.rep.render())
            continue
        v = compare_bounded(sig, denote(sig, EMPTY, t), t_return(EMPTY, r.value), booleans, bound)
        if not v.equal:
            rep.fail(term=print_term(t), verdict=v.render())
    return rep


# ---------------------------------------------------------------- batches


def soundness_suite(sigs: Iterable[Signature], count: int, seed: int = 0, size: int = 12,
                    bound: int = 2, first_order: bool = False) -> TestReport:
    """Soundness over ``count`` generated programs per signature."""
    from .generator import gen_well_typed
    rep = TestReport("soundness", bounds={"world": bound, "size": size, "programs": count})
    for sig in sigs:
        for i in range(count):
            w, t, ty = gen_well_typed(sig, size, seed + i, first_order=first_order)
            rep.merge(check_soundness(sig, w, t, ty, bound))
    return rep


def equations_suite(sig: Signature, bound: int = 3) -> TestReport:
    rep = TestReport("equations", bounds={"world": bound})
    for e in EQUATIONS:
        rep.merge(check_equation(e, sig, bound))
    refuted, witnesses = check_negative(NEGATIVE_CONTROL, sig, bound)
    rep.tried += 1
    if refuted:
        rep.notes.append("negative control refuted:\n" + witnesses[0])
    else:
        rep.fail(schema=NEGATIVE_CONTROL.name, error="deliberately wrong schema not refuted")
    return rep


# ---------------------------------------------------------------- observational differ


def observers(sig: Signature, layout: World, ty: Type, x: str, depth: int = 2) -> list[str]:
    """Boolean-valued observations of a value ``x : ty`` (as source text).

    After ``x`` is computed, an observer may also inspect the cells of the
    layout whose contents are booleans.
    """
    out = []
    match ty:
        case TSum(TUnit(), TUnit()):
            out.append(x)
        case TSum(a, b) if depth > 0:
            for o in observers(sig, layout, a, "a", depth - 1)[:4]:
                out.append(f"match {x} with inj1 a -> {_par(o)} | inj2 b -> true")
                out.append(f"match {x} with inj1 a -> {_par(o)} | inj2 b -> false")
            for o in observers(sig, layout, b, "b", depth - 1)[:4]:
                out.append(f"match {x} with inj1 a -> true | inj2 b -> {_par(o)}")
        case TProd(a, b) if depth > 0:
            for o in observers(sig, layout, a, "p", depth - 1)[:4]:
                out.append(f"match {x} with (p, q) -> {_par(o)}")
            for o in observers(sig, layout, b, "q", depth - 1)[:4]:
                out.append(f"match {x} with (p, q) -> {_par(o)}")
        case TRef(s) if depth > 0:
            for o in observers(sig, layout, sig.typeof(s), "c", depth - 1)[:6]:
                out.append(f"let c = !{x} in {o}")
        case TArrow(a, r) if depth > 0:
            for arg in _sample_values(sig, layout, a)[:3]:
                for o in observers(sig, layout, r, "y", depth - 1)[:4]:
                    out.append(f"let y = {x} {_par(arg)} in {o}")
    for l, s in layout:
        if sig.typeof(s) == TSum(TUnit(), TUnit()):
            out.append(f"!#{l}")
    out.append("true")
    return out


def _par(s: str) -> str:
    return f"({s})"


def _sample_values(sig: Signature, layout: World, ty: Type) -> list[str]:
    if is_first_order(ty):
        return [print_term(value_to_term(v)) for v in interp_type(sig, ty, layout)]
    return []


def obs_diff(sig: Signature, layout: World, t1: Term, t2: Term, ty: Type, budget: int = 2000,
             seed: int = 0) -> tuple[str, dict, Term, Term] | None:
    """Look for a context and heap that tell ``t1`` and ``t2`` apart.

    Returns ``(context, heap, result1, result2)`` or ``None`` when nothing
    within the budget distinguishes them.  Contexts are
    ``let x = [-] in OBS`` for the observers above.
    """
    heaps = list(itertools.islice(heaps_over(sig, layout), budget))
    rng = random.Random(seed)
    if len(heaps) > budget:
        heaps = rng.sample(heaps, budget)
    tried = 0
    for obs in observers(sig, layout, ty, "x"):
        ctx_text = f"let x = [-] in {obs}"
        plugged = []
        for t in (t1, t2):
            text = f"let x = {print_term(t)} in {obs}"
            plugged.append(parse_term(text, sig, layout, {}))
        for heap in heaps:
            tried += 1
            if tried > budget * 50:
                return None
            v1 = run(plugged[0], heap).value
            v2 = run(plugged[1], heap).value
            if v1 != v2:
                return ctx_text, heap, v1, v2
    return None


__all__ = [
    "TestReport", "check_soundness", "compare_open", "EquationSchema", "EQUATIONS", "GS6",
    "NEGATIVE_CONTROL", "check_equation", "check_negative", "check_masking", "mask", "obs_diff",
    "observers", "check_constant_at_zero", "soundness_suite", "equations_suite", "value_to_term", "store_to_heap", "heaps_over", "layout_extensions",
]
