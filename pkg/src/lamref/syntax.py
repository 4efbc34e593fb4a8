"""Abstract and concrete syntax of the calculus.

Core terms follow the grammar exactly; ``Let``, ``RefNew``, ``Seq``,
``Tuple`` and ``If`` are surface forms removed by :func:`desugar`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .lexer import ParseError, TokenStream, _line_col, parse_type
from .signature import Signature, parse_signature_decls, validate_signature
from .types import BOOL, TUnit, Type, show_type
from .worlds import World


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True, slots=True)
class Loc(Term):
    index: int


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Inj(Term):
    tag: int
    body: Term


@dataclass(frozen=True, slots=True)
class Star(Term):
    pass


@dataclass(frozen=True, slots=True)
class Pair(Term):
    first: Term
    second: Term


@dataclass(frozen=True, slots=True)
class Fun(Term):
    param: str
    ty: Type
    body: Term


@dataclass(frozen=True, slots=True)
class MatchEmpty(Term):
    scrut: Term
    ty: Type


@dataclass(frozen=True, slots=True)
class MatchSum(Term):
    scrut: Term
    x1: str
    t1: Term
    x2: str
    t2: Term


@dataclass(frozen=True, slots=True)
class MatchProd(Term):
    scrut: Term
    x1: str
    x2: str
    body: Term


@dataclass(frozen=True, slots=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True, slots=True)
class Assign(Term):
    ref: Term
    value: Term


@dataclass(frozen=True, slots=True)
class Deref(Term):
    ref: Term


@dataclass(frozen=True, slots=True)
class Binding:
    name: str
    sort: str
    init: Term


@dataclass(frozen=True, slots=True)
class New(Term):
    binds: tuple[Binding, ...]
    body: Term


# surface-only forms

@dataclass(frozen=True, slots=True)
class Let(Term):
    name: str
    ty: Type | None
    bound: Term
    body: Term


@dataclass(frozen=True, slots=True)
class RefNew(Term):
    sort: str
    init: Term


@dataclass(frozen=True, slots=True)
class Seq(Term):
    first: Term
    second: Term


@dataclass(frozen=True, slots=True)
class Tuple(Term):
    items: tuple[Term, ...]


@dataclass(frozen=True, slots=True)
class If(Term):
    cond: Term
    then: Term
    orelse: Term


TRUE = Inj(1, Star())
FALSE = Inj(2, Star())

SURFACE = (Let, RefNew, Seq, Tuple, If)


def is_value(t: Term) -> bool:
    match t:
        case Loc() | Var() | Star() | Fun():
            return True
        case Inj(_, b):
            return is_value(b)
        case Pair(a, b):
            return is_value(a) and is_value(b)
    return False


def is_core(t: Term) -> bool:
    return not any(isinstance(s, SURFACE) for s in subterms(t))


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case Inj(_, b) | Fun(_, _, b) | Deref(b) | MatchEmpty(b, _) | RefNew(_, b):
            return (b,)
        case Pair(a, b) | App(a, b) | Assign(a, b) | Seq(a, b) | MatchProd(a, _, _, b):
            return (a, b)
        case MatchSum(s, _, a, _, b):
            return (s, a, b)
        case New(binds, body):
            return tuple(b.init for b in binds) + (body,)
        case Let(_, _, a, b):
            return (a, b)
        case Tuple(items):
            return items
        case If(c, a, b):
            return (c, a, b)
    return ()


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in children(t):
        yield from subterms(c)


def locations(t: Term) -> set[int]:
    return {s.index for s in subterms(t) if isinstance(s, Loc)}


def free_vars(t: Term) -> set[str]:
    match t:
        case Var(x):
            return {x}
        case Fun(x, _, b):
            return free_vars(b) - {x}
        case MatchSum(s, x1, a, x2, b):
            return free_vars(s) | (free_vars(a) - {x1}) | (free_vars(b) - {x2})
        case MatchProd(s, x1, x2, b):
            return free_vars(s) | (free_vars(b) - {x1, x2})
        case New(binds, body):
            names = {b.name for b in binds}
            inner = free_vars(body).union(*(free_vars(b.init) for b in binds))
            return inner - names
        case Let(x, _, a, b):
            return free_vars(a) | (free_vars(b) - {x})
    out: set[str] = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def fresh_name(base: str, avoid: set[str]) -> str:
    stem = base.rstrip("'0123456789") or "x"
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand


# ---------------------------------------------------------------- substitution


def substitute(t: Term, env: dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution ``t[env]``."""
    if not env:
        return t
    fv_env: set[str] = set()
    for v in env.values():
        fv_env |= free_vars(v)
    return _subst(t, env, fv_env)


def _bind(names: list[str], env: dict, fv_env: set, body_fv: set) -> tuple[list[str], dict]:
    env = {k: v for k, v in env.items() if k not in names}
    new_names = []
    renames = {}
    avoid = fv_env | body_fv | set(env)
    for n in names:
        if n in fv_env and env:
            m = fresh_name(n, avoid | set(new_names))
            renames[n] = Var(m)
            new_names.append(m)
        else:
            new_names.append(n)
    if renames:
        env = {**env, **renames}
    return new_names, env


def _subst(t: Term, env: dict, fv_env: set) -> Term:
    match t:
        case Var(x):
            return env.get(x, t)
        case Loc() | Star():
            return t
        case Inj(i, b):
            return Inj(i, _subst(b, env, fv_env))
        case Pair(a, b):
            return Pair(_subst(a, env, fv_env), _subst(b, env, fv_env))
        case App(a, b):
            return App(_subst(a, env, fv_env), _subst(b, env, fv_env))
        case Assign(a, b):
            return Assign(_subst(a, env, fv_env), _subst(b, env, fv_env))
        case Deref(a):
            return Deref(_subst(a, env, fv_env))
        case MatchEmpty(s, ty):
            return MatchEmpty(_subst(s, env, fv_env), ty)
        case Fun(x, ty, b):
            [x2], env2 = _bind([x], env, fv_env, free_vars(b))
            return Fun(x2, ty, _subst(b, env2, fv_env | {x2}))
        case MatchSum(s, x1, a, x2, b):
            [y1], env1 = _bind([x1], env, fv_env, free_vars(a))
            [y2], env2 = _bind([x2], env, fv_env, free_vars(b))
            return MatchSum(_subst(s, env, fv_env), y1, _subst(a, env1, fv_env | {y1}),
                            y2, _subst(b, env2, fv_env | {y2}))
        case MatchProd(s, x1, x2, b):
            [y1, y2], env2 = _bind([x1, x2], env, fv_env, free_vars(b))
            return MatchProd(_subst(s, env, fv_env), y1, y2, _subst(b, env2, fv_env | {y1, y2}))
        case New(binds, body):
            inner_fv = free_vars(body).union(*(free_vars(b.init) for b in binds))
            names, env2 = _bind([b.name for b in binds], env, fv_env, inner_fv)
            fv2 = fv_env | set(names)
            return New(tuple(Binding(n, b.sort, _subst(b.init, env2, fv2))
                             for n, b in zip(names, binds)),
                       _subst(body, env2, fv2))
        case Let(x, ty, a, b):
            [x2], env2 = _bind([x], env, fv_env, free_vars(b))
            return Let(x2, ty, _subst(a, env, fv_env), _subst(b, env2, fv_env | {x2}))
        case _:
            raise TypeError(f"cannot substitute into {type(t).__name__}")


def rename_locations(t: Term, mapping: dict[int, int]) -> Term:
    match t:
        case Loc(l):
            return Loc(mapping.get(l, l))
        case Var() | Star():
            return t
        case Inj(i, b):
            return Inj(i, rename_locations(b, mapping))
        case Pair(a, b):
            return Pair(rename_locations(a, mapping), rename_locations(b, mapping))
        case App(a, b):
            return App(rename_locations(a, mapping), rename_locations(b, mapping))
        case Assign(a, b):
            return Assign(rename_locations(a, mapping), rename_locations(b, mapping))
        case Deref(a):
            return Deref(rename_locations(a, mapping))
        case MatchEmpty(s, ty):
            return MatchEmpty(rename_locations(s, mapping), ty)
        case Fun(x, ty, b):
            return Fun(x, ty, rename_locations(b, mapping))
        case MatchSum(s, x1, a, x2, b):
            return MatchSum(rename_locations(s, mapping), x1, rename_locations(a, mapping),
                            x2, rename_locations(b, mapping))
        case MatchProd(s, x1, x2, b):
            return MatchProd(rename_locations(s, mapping), x1, x2, rename_locations(b, mapping))
        case New(binds, body):
            return New(tuple(Binding(b.name, b.sort, rename_locations(b.init, mapping))
                             for b in binds), rename_locations(body, mapping))
    raise TypeError(f"cannot rename inside {type(t).__name__}")


# ---------------------------------------------------------------- alpha equivalence


def alpha_eq(t1: Term, t2: Term) -> bool:
    return _aeq(t1, t2, {}, {}, 0)


def _aeq(a: Term, b: Term, ea: dict, eb: dict, depth: int) -> bool:
    if type(a) is not type(b):
        return False
    match a:
        case Var(x):
            da, db = ea.get(x), eb.get(b.name)
            if da is None and db is None:
                return x == b.name
            return da == db
        case Loc(l):
            return l == b.index
        case Star():
            return True
        case Inj(i, s):
            return i == b.tag and _aeq(s, b.body, ea, eb, depth)
        case Fun(x, ty, body):
            return ty == b.ty and _aeq(body, b.body, {**ea, x: depth}, {**eb, b.param: depth}, depth + 1)
        case MatchEmpty(s, ty):
            return ty == b.ty and _aeq(s, b.scrut, ea, eb, depth)
        case MatchSum(s, x1, t1, x2, t2):
            return (_aeq(s, b.scrut, ea, eb, depth)
                    and _aeq(t1, b.t1, {**ea, x1: depth}, {**eb, b.x1: depth}, depth + 1)
                    and _aeq(t2, b.t2, {**ea, x2: depth}, {**eb, b.x2: depth}, depth + 1))
        case MatchProd(s, x1, x2, body):
            return (_aeq(s, b.scrut, ea, eb, depth)
                    and _aeq(body, b.body, {**ea, x1: depth, x2: depth + 1},
                             {**eb, b.x1: depth, b.x2: depth + 1}, depth + 2))
        case New(binds, body):
            if len(binds) != len(b.binds):
                return False
            if any(x.sort != y.sort for x, y in zip(binds, b.binds)):
                return False
            ea2 = {**ea, **{x.name: depth + i for i, x in enumerate(binds)}}
            eb2 = {**eb, **{y.name: depth + i for i, y in enumerate(b.binds)}}
            d2 = depth + len(binds)
            return (all(_aeq(x.init, y.init, ea2, eb2, d2) for x, y in zip(binds, b.binds))
                    and _aeq(body, b.body, ea2, eb2, d2))
        case Let(x, ty, s, body):
            return (ty == b.ty and _aeq(s, b.bound, ea, eb, depth)
                    and _aeq(body, b.body, {**ea, x: depth}, {**eb, b.name: depth}, depth + 1))
        case RefNew(sort, s):
            return sort == b.sort and _aeq(s, b.init, ea, eb, depth)
        case Tuple(items):
            return len(items) == len(b.items) and all(
                _aeq(x, y, ea, eb, depth) for x, y in zip(items, b.items))
    ca, cb = children(a), children(b)
    return len(ca) == len(cb) and all(_aeq(x, y, ea, eb, depth) for x, y in zip(ca, cb))


# ---------------------------------------------------------------- printing

# levels: 0 binders/match/new, 1 seq, 2 assign, 3 application, 4 prefix, 5 atom


def _level(t: Term) -> int:
    match t:
        case Fun() | MatchEmpty() | MatchSum() | MatchProd() | New() | Let() | If():
            return 0
        case Seq():
            return 1
        case Assign():
            return 2
        case App():
            return 3
        case Deref() | RefNew():
            return 4
        case Inj(_, b):
            return 5 if isinstance(b, Star) else 4
    return 5


def _p(t: Term, need: int) -> str:
    s = print_term(t)
    return f"({s})" if _level(t) < need else s


def print_term(t: Term) -> str:
    match t:
        case Loc(l):
            return f"#{l}"
        case Var(x):
            return x
        case Star():
            return "()"
        case Inj(1, Star()):
            return "true"
        case Inj(2, Star()):
            return "false"
        case Inj(i, b):
            return f"inj{i} {_p(b, 4)}"
        case Pair(a, b):
            return f"({print_term(a)}, {print_term(b)})"
        case Tuple(items):
            return "(" + ", ".join(print_term(x) for x in items) + ")"
        case Fun(x, ty, b):
            return f"fun ({x}:{show_type(ty)}) -> {print_term(b)}"
        case MatchEmpty(s, ty):
            return f"match {_p(s, 1)} with {{}} : {show_type(ty, 3)}"
        case MatchSum(s, x1, a, x2, b):
            return f"match {_p(s, 1)} with inj1 {x1} -> {_p(a, 1)} | inj2 {x2} -> {print_term(b)}"
        case MatchProd(s, x1, x2, b):
            return f"match {_p(s, 1)} with ({x1}, {x2}) -> {print_term(b)}"
        case App(f, a):
            return f"{_p(f, 3)} {_p(a, 4)}"
        case Assign(r, v):
            return f"{_p(r, 3)} := {_p(v, 2)}"
        case Deref(r):
            return f"!{_p(r, 4)}"
        case New(binds, body):
            inits = ", ".join(f"{b.name}:{b.sort} = {print_term(b.init)}" for b in binds)
            return f"new {{{inits}}} in {print_term(body)}"
        case Let(x, ty, a, b):
            ann = f" : {show_type(ty)}" if ty is not None else ""
            return f"let {x}{ann} = {print_term(a)} in {print_term(b)}"
        case RefNew(sort, a):
            return f"ref {sort} {_p(a, 4)}"
        case Seq(a, b):
            return f"{_p(a, 2)}; {_p(b, 1)}"
        case If(c, a, b):
            return f"if {print_term(c)} then {_p(a, 1)} else {print_term(b)}"
    raise TypeError(t)


# ---------------------------------------------------------------- parsing


def _tracked(method):
    """Record where each parsed term starts, for error reporting."""
    def wrapper(self):
        pos = self.ts.peek.pos
        t = method(self)
        self.positions.setdefault(id(t), pos)
        return t
    return wrapper


class _Parser:
    def __init__(self, ts: TokenStream):
        self.ts = ts
        self.positions: dict[int, int] = {}

    @_tracked
    def term(self) -> Term:
        ts = self.ts
        tok = ts.peek
        if ts.accept("fun"):
            if ts.accept("("):
                x = self.binder()
                ts.expect(":")
                ty = parse_type(ts)
                ts.expect(")")
            else:
                x = self.binder()
                ts.expect(":")
                ty = parse_type(ts)
            ts.expect("->")
            return Fun(x, ty, self.term())
        if ts.accept("match"):
            scrut = self.term()
            ts.expect("with")
            if ts.accept("{"):
                ts.expect("}")
                ts.expect(":")
                return MatchEmpty(scrut, parse_type(ts))
            if ts.accept("("):
                x1 = self.binder()
                ts.expect(",")
                x2 = self.binder()
                ts.expect(")")
                ts.expect("->")
                return MatchProd(scrut, x1, x2, self.term())
            ts.accept("|")
            ts.expect("inj1")
            x1 = self.binder()
            ts.expect("->")
            t1 = self.term()
            ts.expect("|")
            ts.expect("inj2")
            x2 = self.binder()
            ts.expect("->")
            return MatchSum(scrut, x1, t1, x2, self.term())
        if ts.accept("new"):
            ts.expect("{")
            binds = []
            while True:
                name = self.binder()
                ts.expect(":")
                sort = ts.sort_name()
                ts.expect("=")
                pos = ts.peek.pos
                init = self.term()
                if not is_surface_value(init):
                    ts.error("initialiser of new must be a value", pos)
                binds.append(Binding(name, sort, init))
                if not ts.accept(","):
                    break
            ts.expect("}")
            names = [b.name for b in binds]
            if len(set(names)) != len(names):
                ts.error("duplicate binder in new", tok.pos)
            ts.expect("in")
            return New(tuple(binds), self.term())
        if ts.accept("let"):
            x = self.binder()
            ty = parse_type(ts) if ts.accept(":") else None
            ts.expect("=")
            bound = self.term()
            ts.expect("in")
            return Let(x, ty, bound, self.term())
        if ts.accept("if"):
            c = self.term()
            ts.expect("then")
            a = self.term()
            ts.expect("else")
            return If(c, a, self.term())
        return self.seq()

    def binder(self) -> str:
        return self.ts.ident()

    @_tracked
    def seq(self) -> Term:
        first = self.assign()
        if self.ts.accept(";"):
            if self.ts.peek.kind == "eof" or self.ts.at(")") or self.ts.at("|") or self.ts.at("in"):
                return first
            return Seq(first, self.term())
        return first

    @_tracked
    def assign(self) -> Term:
        lhs = self.app()
        if self.ts.accept(":="):
            return Assign(lhs, self.assign_rhs())
        return lhs

    def assign_rhs(self) -> Term:
        if self._starts_binder_form():
            return self.term()
        return self.assign()

    def _starts_binder_form(self) -> bool:
        return any(self.ts.at(k) for k in ("fun", "match", "new", "let", "if"))

    @_tracked
    def app(self) -> Term:
        fn = self.prefix()
        while self._starts_atom():
            fn = App(fn, self.prefix())
        if self._starts_binder_form():
            fn = App(fn, self.term())
        return fn

    def _starts_atom(self) -> bool:
        tok = self.ts.peek
        if tok.kind == "loc":
            return True
        if tok.kind == "id":
            return tok.value not in KEYWORDS_NONATOM or tok.value in ("inj1", "inj2", "ref")
        return tok.kind == "sym" and tok.value in ("(", "()", "!")

    @_tracked
    def prefix(self) -> Term:
        ts = self.ts
        if ts.accept("!"):
            return Deref(self.prefix())
        if ts.accept("inj1"):
            return Inj(1, self.prefix())
        if ts.accept("inj2"):
            return Inj(2, self.prefix())
        if ts.accept("ref"):
            sort = ts.sort_name()
            return RefNew(sort, self.prefix())
        return self.atom()

    @_tracked
    def atom(self) -> Term:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "loc":
            ts.next()
            return Loc(int(tok.value[1:]))
        if ts.accept("()"):
            return Star()
        if ts.accept("true"):
            return TRUE
        if ts.accept("false"):
            return FALSE
        if ts.accept("("):
            if ts.accept(")"):
                return Star()
            items = [self.term()]
            while ts.accept(","):
                items.append(self.term())
            ts.expect(")")
            return items[0] if len(items) == 1 else Tuple(tuple(items))
        if tok.kind == "id" and tok.value not in KEYWORDS_NONATOM:
            return Var(ts.ident())
        ts.error(f"unexpected {tok.value or 'end of input'!r}")


KEYWORDS_NONATOM = {
    "fun", "match", "with", "new", "in", "let", "cell", "layout", "if", "then",
    "else", "inj1", "inj2", "ref", "bool",
} - {"true", "false"}


def is_surface_value(t: Term) -> bool:
    match t:
        case Tuple(items):
            return all(is_surface_value(i) for i in items)
        case Inj(_, b):
            return is_surface_value(b)
        case Pair(a, b):
            return is_surface_value(a) and is_surface_value(b)
    return is_value(t)


def parse_term(text: str, sig: Signature | None = None, layout: World | None = None,
               ctx: dict[str, Type] | None = None, core: bool = True) -> Term:
    ts = TokenStream(text)
    t = _Parser(ts).term()
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.value!r} after term")
    return desugar(t, sig, layout, ctx) if core else t


def parse_layout(ts: TokenStream) -> World:
    ts.expect("{")
    cells = {}
    if not ts.at("}"):
        while True:
            tok = ts.peek
            if tok.kind != "loc":
                ts.error("expected a location literal")
            ts.next()
            ts.expect(":")
            loc = int(tok.value[1:])
            if loc in cells:
                ts.error(f"location #{loc} declared twice", tok.pos)
            cells[loc] = ts.sort_name()
            if not ts.accept(","):
                break
    ts.expect("}")
    return World.of(cells)


def parse_program(text: str) -> tuple[Signature, World, Term]:
    """Signature declarations, an optional ``layout {...}``, then one term."""
    ts = TokenStream(text)
    sig = validate_signature(parse_signature_decls(ts))
    layout = World(())
    if ts.accept("layout"):
        layout = parse_layout(ts)
        for l, s in layout:
            if s not in sig:
                ts.error(f"layout mentions unknown sort {s!r}")
    t = _Parser(ts).term()
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.value!r} after term")
    return sig, layout, desugar(t, sig, layout, {})


@dataclass(frozen=True)
class SurfaceProgram:
    """A parsed program before desugaring, with the source offset of every
    subterm (keyed by ``id``) and the source text for line/column lookup."""
    sig: Signature
    layout: World
    term: Term
    positions: dict = field(compare=False, repr=False)
    text: str = field(compare=False, repr=False)

    def where(self, t: Term) -> tuple[int, int] | None:
        pos = self.positions.get(id(t))
        return None if pos is None else _line_col(self.text, pos)


def parse_surface_program(text: str) -> SurfaceProgram:
    ts = TokenStream(text)
    sig = validate_signature(parse_signature_decls(ts))
    layout = World(())
    if ts.accept("layout"):
        layout = parse_layout(ts)
        for l, s in layout:
            if s not in sig:
                ts.error(f"layout mentions unknown sort {s!r}")
    p = _Parser(ts)
    t = p.term()
    if ts.peek.kind != "eof":
        ts.error(f"unexpected {ts.peek.value!r} after term")
    return SurfaceProgram(sig, layout, t, p.positions, text)


def parse_heap(text: str, sig: Signature | None = None, layout: World | None = None) -> dict[int, Term]:
    """``{#0 = v0, #1 = v1, ...}``: closed values, one per location."""
    ts = TokenStream(text)
    ts.expect("{")
    cells: dict[int, Term] = {}
    if not ts.at("}"):
        while True:
            tok = ts.peek
            if tok.kind != "loc":
                ts.error("expected a location literal")
            ts.next()
            loc = int(tok.value[1:])
            if loc in cells:
                ts.error(f"location #{loc} given twice", tok.pos)
            ts.expect("=")
            pos = ts.peek.pos
            v = desugar(_Parser(ts).term(), sig, layout, {})
            if not is_value(v):
                ts.error(f"contents of #{loc} must be a value", pos)
            cells[loc] = v
            if not ts.accept(","):
                break
    ts.expect("}")
    if ts.peek.kind != "eof":
        ts.error("trailing input after heap")
    return cells


def parse_world(text: str) -> World:
    ts = TokenStream(text)
    w = parse_layout(ts)
    if ts.peek.kind != "eof":
        ts.error("trailing input after world")
    return w


# ---------------------------------------------------------------- desugaring


def desugar(t: Term, sig: Signature | None = None, layout: World | None = None,
            ctx: dict[str, Type] | None = None) -> Term:
    """Remove surface forms.

    Unannotated ``let`` and ``;`` take the bound term's type from inference
    against ``sig``/``layout``/``ctx``; without a signature they must be
    annotated (``;`` then assumes its left side has type ``1``).
    """
    layout = layout if layout is not None else World(())
    bound = {}
    if sig is not None and not is_core(t):
        from .typing import let_types
        bound = let_types(sig, layout, ctx or {}, t)
    return _Desugar(sig, bound).go(t, set(ctx or {}))


class _Desugar:
    def __init__(self, sig: Signature | None, bound: dict[int, Type]):
        self.sig = sig
        self.bound = bound

    def bound_type(self, t: Term) -> Type:
        if id(t) in self.bound:
            return self.bound[id(t)]
        if isinstance(t, Seq):
            return TUnit()
        raise ParseError(0, f"cannot infer the bound type in {print_term(t)} without a signature")

    def go(self, t: Term, scope: set[str]) -> Term:
        match t:
            case Loc() | Var() | Star():
                return t
            case Inj(i, b):
                return Inj(i, self.go(b, scope))
            case Pair(a, b):
                return Pair(self.go(a, scope), self.go(b, scope))
            case Tuple(items):
                parts = [self.go(x, scope) for x in items]
                out = parts[-1]
                for p in reversed(parts[:-1]):
                    out = Pair(p, out)
                return out
            case Fun(x, ty, b):
                return Fun(x, ty, self.go(b, scope | {x}))
            case MatchEmpty(s, ty):
                return MatchEmpty(self.go(s, scope), ty)
            case MatchSum(s, x1, a, x2, b):
                return MatchSum(self.go(s, scope), x1, self.go(a, scope | {x1}),
                                x2, self.go(b, scope | {x2}))
            case MatchProd(s, x1, x2, b):
                return MatchProd(self.go(s, scope), x1, x2, self.go(b, scope | {x1, x2}))
            case App(a, b):
                return App(self.go(a, scope), self.go(b, scope))
            case Assign(a, b):
                return Assign(self.go(a, scope), self.go(b, scope))
            case Deref(a):
                return Deref(self.go(a, scope))
            case New(binds, body):
                inner = scope | {b.name for b in binds}
                return New(tuple(Binding(b.name, b.sort, self.go(b.init, inner)) for b in binds),
                           self.go(body, inner))
            case Let(x, ty, a, b):
                ty = ty if ty is not None else self.bound_type(t)
                return App(Fun(x, ty, self.go(b, scope | {x})), self.go(a, scope))
            case Seq(a, b):
                x = _unused("_", b, scope)
                return App(Fun(x, self.bound_type(t), self.go(b, scope | {x})), self.go(a, scope))
            case RefNew(sort, a):
                if self.sig is None:
                    raise ParseError(0, "ref sugar needs a signature")
                a2 = self.go(a, scope)
                avoid = free_vars(a2) | scope
                x = fresh_name("v", avoid)
                y = fresh_name("r", avoid | {x})
                return App(Fun(x, self.sig.typeof(sort), New((Binding(y, sort, Var(x)),), Var(y))), a2)
            case If(c, a, b):
                x = "_" if "_" not in (free_vars(a) | free_vars(b)) else fresh_name("_", scope | free_vars(a) | free_vars(b))
                return MatchSum(self.go(c, scope), x, self.go(a, scope | {x}),
                                x, self.go(b, scope | {x}))
        raise TypeError(t)


def _unused(base: str, body: Term, scope: set[str]) -> str:
    fv = free_vars(body)
    return base if base not in fv else fresh_name(base, fv | scope)


__all__ = [
    "Term", "Loc", "Var", "Inj", "Star", "Pair", "Fun", "MatchEmpty", "MatchSum",
    "MatchProd", "App", "Assign", "Deref", "Binding", "New", "Let", "RefNew", "Seq",
    "Tuple", "If", "TRUE", "FALSE", "BOOL", "is_value", "free_vars", "substitute",
    "alpha_eq", "print_term", "parse_term", "parse_program", "parse_surface_program",
    "SurfaceProgram", "parse_world", "parse_heap", "desugar", "ParseError",
]
