"""Typing judgements ``ctx |-_w t : ty``.

Functions and empty matches carry annotations, but injections do not, so
the unannotated summand of ``inj_i t`` is solved by first-order
unification.  :func:`infer` returns the principal type; a summand nothing
constrains stays a :class:`TMeta`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .signature import Signature
from .syntax import (App, Assign, Deref, Fun, If, Inj, Let, Loc, MatchEmpty, MatchProd, MatchSum,
                     New, Pair, RefNew, Seq, Star, Term, Tuple, Var, is_surface_value, print_term)
from .types import TArrow, TEmpty, TProd, TRef, TSum, TUnit, Type, refs_of, show_type
from .worlds import World

Layout = World
Context = Mapping[str, Type]


@dataclass(frozen=True, slots=True)
class TMeta(Type):
    """An as-yet undetermined summand."""
    ident: int

    def is_ground(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"'a{self.ident}"


class TypingError(Exception):
    pass


class TypeError_(TypingError):
    def __init__(self, subterm: Term, expected: str | Type, found: Type | None):
        self.subterm, self.expected, self.found = subterm, expected, found
        exp = _show(expected) if isinstance(expected, Type) else expected
        fnd = _show(found) if found is not None else "?"
        super().__init__(f"in {print_term(subterm)}: expected {exp}, found {fnd}")


class UnboundIdentifier(TypingError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound identifier {name}")


class UnknownLocation(TypingError):
    def __init__(self, loc: int):
        self.loc = loc
        super().__init__(f"location #{loc} is not in the layout")


class NotAValue(TypingError):
    def __init__(self, init: Term):
        self.init = init
        super().__init__(f"initialiser {print_term(init)} is not a value")


def _show(t: Type) -> str:
    if isinstance(t, TMeta):
        return str(t)
    match t:
        case TSum(a, b):
            return f"({_show(a)} + {_show(b)})"
        case TProd(a, b):
            return f"({_show(a)} * {_show(b)})"
        case TArrow(a, b):
            return f"({_show(a)} -> {_show(b)})"
    return show_type(t)


def has_meta(t: Type) -> bool:
    match t:
        case TMeta():
            return True
        case TRef(s):
            return is_sort_meta(s)
        case TSum(a, b) | TProd(a, b) | TArrow(a, b):
            return has_meta(a) or has_meta(b)
    return False


def check_type(sig: Signature, ty: Type) -> None:
    for s in refs_of(ty):
        if s not in sig:
            raise TypingError(f"type {show_type(ty)} mentions unknown sort {s}")


def infer(sig: Signature, w: Layout, ctx: Context, t: Term) -> Type:
    """Principal type of ``t``; raises a :class:`TypingError` when none exists."""
    inf = _Infer(sig, w.as_dict())
    ty = inf.go(dict(ctx), t)
    inf.finish(t)
    return inf.zonk(ty)


def check(sig: Signature, w: Layout, ctx: Context, t: Term, ty: Type) -> None:
    """Check ``t`` against a fully known type."""
    inf = _Infer(sig, w.as_dict())
    found = inf.go(dict(ctx), t)
    inf.unify(t, ty, found)
    inf.finish(t)


def typeable_at(sig: Signature, w: Layout, ctx: Context, t: Term, ty: Type) -> bool:
    try:
        check(sig, w, ctx, t, ty)
        return True
    except TypingError:
        return False


def is_instance(principal: Type, ty: Type, subst: dict | None = None) -> bool:
    """Whether ``ty`` is obtained from ``principal`` by filling in its metas."""
    subst = {} if subst is None else subst
    match principal:
        case TMeta(i):
            if i in subst:
                return subst[i] == ty
            subst[i] = ty
            return True
        case TSum(a, b):
            return isinstance(ty, TSum) and is_instance(a, ty.left, subst) and is_instance(b, ty.right, subst)
        case TProd(a, b):
            return isinstance(ty, TProd) and is_instance(a, ty.left, subst) and is_instance(b, ty.right, subst)
        case TArrow(a, b):
            return isinstance(ty, TArrow) and is_instance(a, ty.arg, subst) and is_instance(b, ty.res, subst)
        case TRef(sort) if is_sort_meta(sort):
            if not isinstance(ty, TRef):
                return False
            return subst.setdefault(sort, ty.sort) == ty.sort
    return principal == ty


def ground(sig: Signature, ty: Type) -> Type:
    """Fill every metavariable with ``1`` and every sort metavariable with
    the first sort; the result is an instance of ``ty``."""
    match ty:
        case TMeta():
            return TUnit()
        case TRef(s) if is_sort_meta(s):
            return TRef(sig.sorts[0])
        case TSum(a, b):
            return TSum(ground(sig, a), ground(sig, b))
        case TProd(a, b):
            return TProd(ground(sig, a), ground(sig, b))
        case TArrow(a, b):
            return TArrow(ground(sig, a), ground(sig, b))
    return ty


def is_sort_meta(sort: str) -> bool:
    return sort.startswith("?")


def layout_extends(w: Layout, w2: Layout) -> bool:
    return w.extends(w2)


def let_types(sig: Signature, w: Layout, ctx: Context, t: Term) -> dict[int, Type]:
    """Bound types of every unannotated ``let``/``;`` in a surface term, keyed by ``id``.

    Metas nothing constrains are read as ``1``; any choice gives a derivation.
    """
    inf = _Infer(sig, w.as_dict())
    inf.go(dict(ctx), t)
    inf.finish(t, choose=True)
    return {k: inf.default(v) for k, v in inf.bound_types.items()}


class _Infer:
    def __init__(self, sig: Signature, layout: dict[int, str]):
        self.sig = sig
        self.layout = layout
        self.subst: dict[int, Type] = {}
        self.counter = itertools.count()
        self.bound_types: dict[int, Type] = {}
        # references whose sort is not yet known: '?n' sorts, with the
        # types their contents must have
        self.sort_subst: dict[str, str] = {}
        self.contents: list[tuple[str, Type]] = []

    def fresh(self) -> TMeta:
        return TMeta(next(self.counter))

    def resolve(self, t: Type) -> Type:
        while isinstance(t, TMeta) and t.ident in self.subst:
            t = self.subst[t.ident]
        return t

    def resolve_sort(self, s: str) -> str:
        while s in self.sort_subst:
            s = self.sort_subst[s]
        return s

    def typeof(self, sort: str) -> Type:
        sort = self.resolve_sort(sort)
        if not is_sort_meta(sort):
            return self.sig.typeof(sort)
        m = self.fresh()
        self.contents.append((sort, m))
        return m

    def solve(self, where: Term) -> None:
        pending = []
        progress = True
        while progress:
            progress = False
            pending = []
            for sort, ty in self.contents:
                r = self.resolve_sort(sort)
                if is_sort_meta(r):
                    pending.append((sort, ty))
                else:
                    self.unify(where, self.sig.typeof(r), ty)
                    progress = True
            self.contents = pending

    def finish(self, where: Term, choose: bool = False) -> None:
        """Discharge content constraints; if sorts remain open, make sure some
        choice of sorts satisfies them (and keep it when ``choose``)."""
        self.solve(where)
        if not self.contents:
            return
        saved = (dict(self.subst), dict(self.sort_subst), list(self.contents))
        if not self._search(where):
            raise TypingError(f"no sort makes {print_term(where)} typeable")
        if not choose:
            self.subst, self.sort_subst, self.contents = saved

    def _search(self, where: Term) -> bool:
        self.solve(where)
        if not self.contents:
            return True
        sort = self.resolve_sort(self.contents[0][0])
        for cand in self.sig.sorts:
            saved = (dict(self.subst), dict(self.sort_subst), list(self.contents))
            self.sort_subst[sort] = cand
            try:
                if self._search(where):
                    return True
            except TypingError:
                pass
            self.subst, self.sort_subst, self.contents = saved
        return False

    def zonk(self, t: Type) -> Type:
        t = self.resolve(t)
        match t:
            case TRef(s):
                return TRef(self.resolve_sort(s))
            case TSum(a, b):
                return TSum(self.zonk(a), self.zonk(b))
            case TProd(a, b):
                return TProd(self.zonk(a), self.zonk(b))
            case TArrow(a, b):
                return TArrow(self.zonk(a), self.zonk(b))
        return t

    def default(self, t: Type) -> Type:
        t = self.zonk(t)
        match t:
            case TMeta():
                return TUnit()
            case TRef(s) if is_sort_meta(s):
                return TRef(self.sig.sorts[0])
            case TSum(a, b):
                return TSum(self.default(a), self.default(b))
            case TProd(a, b):
                return TProd(self.default(a), self.default(b))
            case TArrow(a, b):
                return TArrow(self.default(a), self.default(b))
        return t

    def occurs(self, i: int, t: Type) -> bool:
        t = self.resolve(t)
        match t:
            case TMeta(j):
                return i == j
            case TSum(a, b) | TProd(a, b) | TArrow(a, b):
                return self.occurs(i, a) or self.occurs(i, b)
        return False

    def unify(self, where: Term, expected: Type, found: Type) -> None:
        if not self._unify(expected, found):
            raise TypeError_(where, self.zonk(expected), self.zonk(found))

    def _unify(self, a: Type, b: Type) -> bool:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, TMeta):
            if a == b:
                return True
            if self.occurs(a.ident, b):
                return False
            self.subst[a.ident] = b
            return True
        if isinstance(b, TMeta):
            return self._unify(b, a)
        if type(a) is not type(b):
            return False
        match a:
            case TRef(x):
                x, y = self.resolve_sort(x), self.resolve_sort(b.sort)
                if x == y:
                    return True
                if is_sort_meta(x):
                    self.sort_subst[x] = y
                    return True
                if is_sort_meta(y):
                    self.sort_subst[y] = x
                    return True
                return False
            case TSum(x, y) | TProd(x, y):
                return self._unify(x, b.left) and self._unify(y, b.right)
            case TArrow(x, y):
                return self._unify(x, b.arg) and self._unify(y, b.res)
        return a == b

    def as_shape(self, where: Term, t: Type, kind: type) -> Type:
        t = self.resolve(t)
        if isinstance(t, TMeta):
            shaped = kind(self.fresh(), self.fresh())
            self.subst[t.ident] = shaped
            return shaped
        if not isinstance(t, kind):
            name = {TSum: "a sum type", TProd: "a product type", TArrow: "a function type"}[kind]
            raise TypeError_(where, name, self.zonk(t))
        return t

    def as_ref(self, where: Term, t: Type) -> TRef:
        t = self.resolve(t)
        if isinstance(t, TMeta):
            shaped = TRef(f"?{next(self.counter)}")
            self.subst[t.ident] = shaped
            return shaped
        if not isinstance(t, TRef):
            raise TypeError_(where, "a reference type", self.zonk(t))
        return t

    def go(self, ctx: dict, t: Term) -> Type:
        match t:
            case Loc(l):
                if l not in self.layout:
                    raise UnknownLocation(l)
                return TRef(self.layout[l])
            case Var(x):
                if x not in ctx:
                    raise UnboundIdentifier(x)
                return ctx[x]
            case Inj(i, b):
                inner = self.go(ctx, b)
                other = self.fresh()
                return TSum(inner, other) if i == 1 else TSum(other, inner)
            case Star():
                return TUnit()
            case Pair(a, b):
                return TProd(self.go(ctx, a), self.go(ctx, b))
            case Fun(x, ty, b):
                check_type(self.sig, ty)
                return TArrow(ty, self.go({**ctx, x: ty}, b))
            case MatchEmpty(s, ty):
                check_type(self.sig, ty)
                self.unify(s, TEmpty(), self.go(ctx, s))
                return ty
            case MatchSum(s, x1, a, x2, b):
                st = self.as_shape(s, self.go(ctx, s), TSum)
                ta = self.go({**ctx, x1: st.left}, a)
                tb = self.go({**ctx, x2: st.right}, b)
                self.unify(b, ta, tb)
                return ta
            case MatchProd(s, x1, x2, b):
                st = self.as_shape(s, self.go(ctx, s), TProd)
                return self.go({**ctx, x1: st.left, x2: st.right}, b)
            case App(f, a):
                ft = self.as_shape(f, self.go(ctx, f), TArrow)
                self.unify(a, ft.arg, self.go(ctx, a))
                return ft.res
            case Assign(r, v):
                rt = self.as_ref(r, self.go(ctx, r))
                self.unify(v, self.typeof(rt.sort), self.go(ctx, v))
                return TUnit()
            case Deref(r):
                rt = self.as_ref(r, self.go(ctx, r))
                return self.typeof(rt.sort)
            case New(binds, body):
                inner = dict(ctx)
                for b in binds:
                    if b.sort not in self.sig:
                        raise TypingError(f"unknown sort {b.sort}")
                    inner[b.name] = TRef(b.sort)
                for b in binds:
                    if not is_surface_value(b.init):
                        raise NotAValue(b.init)
                    self.unify(b.init, self.sig.typeof(b.sort), self.go(inner, b.init))
                return self.go(inner, body)
            # surface forms, used when desugaring unannotated binders
            case Let(x, ty, a, b):
                ta = self.go(ctx, a)
                if ty is not None:
                    self.unify(a, ty, ta)
                    ta = ty
                self.bound_types[id(t)] = ta
                return self.go({**ctx, x: ta}, b)
            case Seq(a, b):
                self.bound_types[id(t)] = self.go(ctx, a)
                return self.go(ctx, b)
            case RefNew(sort, a):
                self.unify(a, self.sig.typeof(sort), self.go(ctx, a))
                return TRef(sort)
            case Tuple(items):
                tys = [self.go(ctx, i) for i in items]
                out = tys[-1]
                for ty in reversed(tys[:-1]):
                    out = TProd(ty, out)
                return out
            case If(c, a, b):
                self.unify(c, TSum(TUnit(), TUnit()), self.go(ctx, c))
                ta = self.go(ctx, a)
                self.unify(b, ta, self.go(ctx, b))
                return ta
        raise TypingError(f"cannot type {type(t).__name__}")
