"""The hiding monad P, the storage monad T, and the denotational semantics.

An element of ``T X w`` is a :class:`MonadComp`: a function that, given an
injection ``h : w -> w'`` and a store over ``w'``, returns a representative
``q_{h'}(x, sigma')`` over ``w'``.  Elements of ``P A w`` are bare
:class:`CoendRep` values.  Function values are :class:`Closure` objects that
re-enter the term semantics when applied.

Equality of computations can only be checked at finitely many components;
:func:`compare_bounded` does that and says when its answer is approximate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .initialisations import (CoendRep, Heaplet, Initialisation, coend_equal, gc_canonical,
                              promote, store, store_lookup, store_update, stores_action, stores_over)
from .signature import Signature
from .syntax import (App, Assign, Deref, Fun, Inj, Loc, MatchEmpty, MatchProd, MatchSum, New, Pair,
                     Star, Term, Var, alpha_eq, free_vars, is_value, locations, print_term,
                     rename_locations, substitute)
from .types import TArrow, TEmpty, TProd, TRef, TSum, TUnit, Type
from .worlds import (UNIT, Injection, SemValue, VInj, VLoc, VPair, VUnit, World, complement, enumerate_worlds,
                     identity, inclusion, indep_coproduct, injections, interp_type, numof)


class DenotationError(Exception):
    pass


class Approximate(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


# ---------------------------------------------------------------- semantic values


@dataclass(frozen=True, slots=True)
class Closure:
    """A function value at world ``lh.cod``.

    ``layout`` holds just the locations the function mentions, ``lh`` places
    them in the current world and ``env`` binds its free identifiers.
    """
    layout: World
    lh: Injection
    env: tuple[tuple[str, object], ...]
    fun: Fun
    sig: Signature = field(compare=False, hash=False, repr=False)

    def act(self, g: Injection) -> Closure:
        return Closure(self.layout, _push(g, self.lh),
                       tuple((x, v.act(g)) for x, v in self.env), self.fun, self.sig)

    def locs(self) -> Iterator[int]:
        yield from self.lh.image()
        for _, v in self.env:
            yield from v.locs()

    @property
    def world(self) -> World:
        return self.lh.cod

    def apply(self, arg) -> MonadComp:
        env = dict(self.env)
        env[self.fun.param] = arg
        return denote_term(self.sig, self.layout, self.fun.body, self.lh, env)

    def __str__(self) -> str:
        binds = ", ".join(f"{x}={v}" for x, v in self.env)
        locs = ", ".join(f"#{s}=>#{t}" for s, t in self.lh.pairs)
        return f"<{print_term(self.fun)} | {locs}{'; ' if locs and binds else ''}{binds}>"


@dataclass(frozen=True, slots=True)
class EnvVal:
    """The pair (location environment, identifier environment) threaded by strength."""
    lh: Injection
    env: tuple[tuple[str, object], ...]

    def act(self, g: Injection) -> EnvVal:
        return EnvVal(_push(g, self.lh), tuple((x, v.act(g)) for x, v in self.env))

    def locs(self) -> Iterator[int]:
        yield from self.lh.image()
        for _, v in self.env:
            yield from v.locs()

    def __str__(self) -> str:
        return "<env>"


def _push(g: Injection, lh: Injection) -> Injection:
    """``g . lh``, where ``g`` need only be defined on the image of ``lh``
    (relabelling after garbage collection drops unreachable cells)."""
    m = g.as_dict()
    return Injection(lh.dom, g.cod, tuple((s, m[t]) for s, t in lh.pairs))


def tuple_value(items: list) -> object:
    """Right-nested pairs; a single item stands for itself."""
    out = items[-1]
    for v in reversed(items[:-1]):
        out = VPair(v, out)
    return out


def untuple(v, n: int) -> list:
    out = []
    for _ in range(n - 1):
        out.append(v.first)
        v = v.second
    out.append(v)
    return out


# ---------------------------------------------------------------- P


def p_return(w: World, payload, sigma: Heaplet) -> CoendRep:
    return CoendRep(w, identity(w), payload, sigma)


def p_hide(h: Injection, r: CoendRep) -> CoendRep:
    """``q_{h'}(a)`` over ``h.cod`` becomes ``q_{h'.h}(a)`` over ``h.dom``."""
    if h.cod != r.base:
        raise DenotationError("hide along an injection into a different world")
    return gc_canonical(CoendRep(h.dom, r.h.after(h), r.payload, r.store))


def p_bind(r: CoendRep, g: Callable[[World, object, Heaplet], CoendRep]) -> CoendRep:
    return p_hide(r.h, g(r.priv, r.payload, r.store))


def p_strength(x, r: CoendRep) -> CoendRep:
    return gc_canonical(CoendRep(r.base, r.h, VPair(x.act(r.h), r.payload), r.store))


def p_action(i: Initialisation, r: CoendRep) -> CoendRep:
    """Functorial action on an initialisation out of ``r.base``."""
    if i.dom != r.base:
        raise DenotationError("initialisation does not start at the base")
    pr = promote(r.h, i)
    u = pr.init.inj
    return gc_canonical(CoendRep(i.cod, pr.push, r.payload.act(u), stores_action(pr.init, r.store)))


# ---------------------------------------------------------------- T


@dataclass(frozen=True, eq=False)
class MonadComp:
    base: World
    run: Callable[[Injection, Heaplet], CoendRep] = field(compare=False)

    def component(self, h: Injection, sigma: Heaplet) -> CoendRep:
        if h.dom != self.base:
            raise DenotationError(f"component index must start at {self.base}")
        if sigma.shape != h.cod:
            raise DenotationError("store is not over the codomain of the index")
        return gc_canonical(self.run(h, sigma))

    def at(self, sigma: Heaplet) -> CoendRep:
        return self.component(identity(self.base), sigma)


Kleisli = Callable[[World, object], MonadComp]


def t_return(w: World, x) -> MonadComp:
    return MonadComp(w, lambda h, s: CoendRep(h.cod, identity(h.cod), x.act(h), s))


def t_bind(m: MonadComp, f: Kleisli) -> MonadComp:
    def run(h, s):
        r = gc_canonical(m.run(h, s))
        r2 = f(r.priv, r.payload).run(identity(r.priv), r.store)
        return CoendRep(h.cod, r2.h.after(r.h), r2.payload, r2.store)
    return MonadComp(m.base, run)


def t_map(m: MonadComp, fn: Callable[[object], object]) -> MonadComp:
    def run(h, s):
        r = m.run(h, s)
        return CoendRep(r.base, r.h, fn(r.payload), r.store)
    return MonadComp(m.base, run)


def t_strength(x, m: MonadComp) -> MonadComp:
    def run(h, s):
        r = m.run(h, s)
        return CoendRep(h.cod, r.h, VPair(x.act(r.h.after(h)), r.payload), r.store)
    return MonadComp(m.base, run)


def t_dstrength(m1: MonadComp, m2: MonadComp) -> MonadComp:
    """Runs ``m1`` first, then ``m2`` at the world ``m1`` reached."""
    if m1.base != m2.base:
        raise DenotationError("double strength over different worlds")

    def run(h1, s1):
        r1 = gc_canonical(m1.run(h1, s1))
        h2 = r1.h
        r2 = m2.run(h2.after(h1), r1.store)
        h3 = r2.h
        return CoendRep(h1.cod, h3.after(h2), VPair(r1.payload.act(h3), r2.payload), r2.store)
    return MonadComp(m1.base, run)


def t_act(g: Injection, m: MonadComp) -> MonadComp:
    """Functorial action along ``g : m.base -> w``."""
    if g.dom != m.base:
        raise DenotationError("action along an injection from a different world")
    return MonadComp(g.cod, lambda h, s: m.run(h.after(g), s))


def mget(w: World, loc: int) -> MonadComp:
    return MonadComp(w, lambda h, s: CoendRep(h.cod, identity(h.cod), store_lookup(s, h(loc)), s))


def mset(w: World, loc: int, a: SemValue) -> MonadComp:
    return MonadComp(w, lambda h, s: CoendRep(
        h.cod, identity(h.cod), UNIT, store_update(s, h(loc), a.act(h))))


def minit(w: World, w0: World, data: Mapping[int, SemValue]) -> Initialisation:
    """Initialisation ``w -> w (+) w0`` giving cell ``l`` of ``w0`` the value ``data[l]``.

    ``data`` lives at ``w (+) w0`` and may mention the new cells.
    """
    _, i1, i2 = indep_coproduct(w, w0)
    return Initialisation.make(i1, {i2(l): data[l] for l in w0.support})


def mnew(w: World, w0: World, data: Mapping[int, SemValue]) -> MonadComp:
    """Allocate ``w0``; the payload is the tuple of fresh locations in ``w0`` order."""
    ini = minit(w, w0, data)
    _, _, i2 = indep_coproduct(w, w0)

    def run(h, s):
        pr = promote(h, ini)
        fresh = tuple_value([VLoc(pr.push(i2(l))) for l in w0.support])
        return CoendRep(h.cod, pr.init.inj, fresh, stores_action(pr.init, s))
    return MonadComp(w, run)


def t_end_action(i: Initialisation, r: CoendRep) -> CoendRep:
    """Covariant action of the end's index category on a component's value."""
    return p_action(i, r)


# ---------------------------------------------------------------- semantics


def _env_items(env: Mapping[str, object], keep) -> tuple:
    return tuple(sorted((x, v) for x, v in env.items() if x in keep))


def denote_value(sig: Signature, w: World, v: Term, h: Injection, env: Mapping[str, object]):
    """Value semantics at location environment ``h : w -> w'``."""
    match v:
        case Loc(l):
            return VLoc(h(l))
        case Var(x):
            return env[x]
        case Inj(i, b):
            return VInj(i, denote_value(sig, w, b, h, env))
        case Star():
            return UNIT
        case Pair(a, b):
            return VPair(denote_value(sig, w, a, h, env), denote_value(sig, w, b, h, env))
        case Fun():
            used = w.restrict(locations(v))
            lh = Injection(used, h.cod, tuple((l, h(l)) for l in used.support))
            return Closure(used, lh, _env_items(env, free_vars(v)), v, sig)
    raise DenotationError(f"not a value: {print_term(v)}")


def denote_term(sig: Signature, w: World, t: Term, h: Injection, env: Mapping[str, object]) -> MonadComp:
    """Term semantics at ``h : w -> w'``; the result lives at ``w'``."""
    here = h.cod
    if is_value(t):
        return t_return(here, denote_value(sig, w, t, h, env))

    def sub(s: Term) -> MonadComp:
        return denote_term(sig, w, s, h, env)

    closure_env = EnvVal(h, tuple(sorted(env.items())))

    def with_env(m: MonadComp, k: Callable[[Injection, dict, object], MonadComp]) -> MonadComp:
        def cont(_, p):
            e = p.first
            return k(e.lh, dict(e.env), p.second)
        return t_bind(t_strength(closure_env, m), cont)

    match t:
        case Inj(i, b):
            return t_map(sub(b), lambda y: VInj(i, y))
        case Pair(a, b):
            return t_dstrength(sub(a), sub(b))
        case MatchEmpty(s, _):
            def absurd(_, y):
                raise DenotationError("value of the empty type")
            return t_bind(sub(s), absurd)
        case MatchSum(s, x1, a, x2, b):
            def branch(h2, e2, y):
                if y.tag == 1:
                    return denote_term(sig, w, a, h2, {**e2, x1: y.value})
                return denote_term(sig, w, b, h2, {**e2, x2: y.value})
            return with_env(sub(s), branch)
        case MatchProd(s, x1, x2, b):
            return with_env(sub(s), lambda h2, e2, y: denote_term(
                sig, w, b, h2, {**e2, x1: y.first, x2: y.second}))
        case App(f, a):
            return t_bind(t_dstrength(sub(f), sub(a)), lambda _, p: p.first.apply(p.second))
        case Assign(r, v):
            return t_bind(t_dstrength(sub(r), sub(v)), lambda wk, p: mset(wk, p.first.index, p.second))
        case Deref(r):
            return t_bind(sub(r), lambda wk, y: mget(wk, y.index))
        case New(binds, body):
            w0 = World(tuple((i, b.sort) for i, b in enumerate(binds)))
            ext, i1, i2 = indep_coproduct(here, w0)
            inner_env = {x: v.act(i1) for x, v in env.items()}
            for i, b in enumerate(binds):
                inner_env[b.name] = VLoc(i2(i))
            h_ext = i1.after(h)
            data = {i: denote_value(sig, w, b.init, h_ext, inner_env) for i, b in enumerate(binds)}
            names = [b.name for b in binds]

            def cont(h2, e2, fresh):
                return denote_term(sig, w, body, h2, {**e2, **dict(zip(names, untuple(fresh, len(names))))})
            return with_env(mnew(here, w0, data), cont)
    raise DenotationError(f"cannot interpret {type(t).__name__}")


def denote(sig: Signature, w: World, t: Term, env: Mapping[str, object] | None = None) -> MonadComp:
    """Closed-term denotation at ``w``, as an element of ``T X w``."""
    return denote_term(sig, w, t, identity(w), env or {})


def denote_heap(sig: Signature, w: World, heap: Mapping[int, Term]) -> Heaplet:
    ident = identity(w)
    return store(w, {l: denote_value(sig, w, heap[l], ident, {}) for l in w.support})


# ---------------------------------------------------------------- bounded equality


@dataclass(frozen=True)
class Verdict:
    status: str                 # "equal", "not-equal" or "approximate"
    witness: tuple | None = None  # (h, sigma, left, right) for not-equal
    reason: str = ""
    bound: int = 0

    @property
    def equal(self) -> bool:
        return self.status == "equal"

    def render(self) -> str:
        if self.status == "not-equal" and self.witness:
            h, sigma, left, right = self.witness
            return (f"not-equal (bound {self.bound})\n  at h = {h}\n  store = {sigma}\n"
                    f"  left:  {left.render()}\n  right: {right.render()}")
        extra = f": {self.reason}" if self.reason else ""
        return f"{self.status} (bound {self.bound}){extra}"


EQUAL, NOT_EQUAL, APPROX = "equal", "not-equal", "approximate"


def _worst(a: str, b: str) -> str:
    order = {EQUAL: 0, APPROX: 1, NOT_EQUAL: 2}
    return a if order[a] >= order[b] else b


def is_first_order(ty: Type) -> bool:
    match ty:
        case TArrow():
            return False
        case TSum(a, b) | TProd(a, b):
            return is_first_order(a) and is_first_order(b)
    return True


@dataclass
class _Cmp:
    sig: Signature
    ext: int = 1           # cells added when probing a function value
    depth: int = 2         # nesting of function comparisons
    notes: list = field(default_factory=list)

    def reps(self, r1: CoendRep, r2: CoendRep, ty: Type, depth: int) -> str:
        c1, c2 = gc_canonical(r1), gc_canonical(r2)
        if c1 == c2:
            return EQUAL
        if is_first_order(ty):
            return NOT_EQUAL
        if depth <= 0:
            self.notes.append("function comparison depth exhausted")
            return APPROX
        p1, p2 = c1.private_cells(), c2.private_cells()
        best = NOT_EQUAL
        if sorted(s for _, s in p1) == sorted(s for _, s in p2):
            for pi in injections(p2, p1):
                m = dict(pi.pairs)
                m.update({l: l for l in c2.base.support})
                iso = Injection.make(c2.priv, c1.priv, m)
                moved = CoendRep(c1.base, iso.after(c2.h), c2.payload.act(iso),
                                 store(c1.priv, {iso(l): v.act(iso) for l, v in c2.store.items()}))
                if moved.store != c1.store:
                    continue
                verdict = self.values(c1.payload, moved.payload, ty, c1.priv, depth)
                if verdict == EQUAL:
                    return EQUAL
                if verdict == APPROX:
                    best = APPROX
        if best == APPROX:
            return APPROX
        # No renaming matches.  That is decisive only when every private cell
        # on either side is semantically needed.
        for c in (c1, c2):
            for l in c.private_cells().support:
                if not self.live(c, l, ty, depth):
                    self.notes.append(f"private cell #{l} may be dead")
                    return APPROX
        return NOT_EQUAL

    def values(self, v1, v2, ty: Type, w: World, depth: int) -> str:
        match ty:
            case TArrow(arg, res):
                return self.functions(v1, v2, arg, res, w, depth)
            case TSum(a, b):
                if v1.tag != v2.tag:
                    return NOT_EQUAL
                return self.values(v1.value, v2.value, a if v1.tag == 1 else b, w, depth)
            case TProd(a, b):
                return _worst(self.values(v1.first, v2.first, a, w, depth),
                              self.values(v1.second, v2.second, b, w, depth))
        return EQUAL if v1 == v2 else NOT_EQUAL

    def probes(self, w: World, arg: Type) -> Iterator[tuple[Injection, object, Heaplet]]:
        # Functions are natural, so probing along w -> w + e for each
        # multiset e of new sorts covers every injection up to renaming.
        for k in range(self.ext + 1):
            for sorts in itertools.combinations_with_replacement(self.sig.sorts, k):
                _, g, _ = indep_coproduct(w, World(tuple(enumerate(sorts))))
                for a in self.arguments(arg, g.cod):
                    for s in stores_over(self.sig, g.cod):
                        yield g, a, s

    def arguments(self, ty: Type, w: World) -> list:
        if is_first_order(ty):
            return interp_type(self.sig, ty, w)
        self.notes.append("argument of function type not enumerated")
        return []

    def functions(self, f1, f2, arg: Type, res: Type, w: World, depth: int) -> str:
        if f1 == f2:
            return EQUAL
        t1, t2 = closed_term(f1), closed_term(f2)
        if t1 is not None and t2 is not None and alpha_eq(t1, t2):
            return EQUAL
        out = EQUAL if is_first_order(arg) else APPROX
        for g, a, s in self.probes(w, arg):
            r1 = f1.act(g).apply(a).at(s)
            r2 = f2.act(g).apply(a).at(s)
            v = self.reps(r1, r2, res, depth - 1)
            if v == NOT_EQUAL:
                return NOT_EQUAL
            out = _worst(out, v)
        return out

    def live(self, c: CoendRep, loc: int, ty: Type, depth: int) -> bool:
        """Whether private cell ``loc`` visibly affects the representative.

        A cell reached through first-order data is always live.  Otherwise we
        look for an application of a function in the payload whose result
        changes when the cell's contents change (beyond the change itself),
        or which hands the cell back.
        """
        if loc in _first_order_reach(c, ty):
            return True
        sort = c.priv.sort_of(loc)
        for fn, arg, res in _functions_in(c.payload, ty):
            for g, a, s in self.probes(c.priv, arg):
                target = g(loc)
                r = gc_canonical(fn.act(g).apply(a).at(s))
                if r.h(target) in _first_order_reach(r, res) - set(r.h.image()) | set(
                        _first_order_locs(r.payload, res)):
                    return True
                current = store_lookup(s, target)
                for alt in interp_type(self.sig, self.sig.typeof(sort), s.shape):
                    if alt == current:
                        continue
                    other = fn.act(g).apply(a).at(store_update(s, target, alt))
                    expected = CoendRep(r.base, r.h, r.payload,
                                        store_update(r.store, r.h(target), alt.act(r.h)))
                    if self.reps(expected, other, res, depth - 1) == NOT_EQUAL:
                        return True
        return False


def closed_term(v) -> Term | None:
    """The value as a closed term over its world, or None for non-values.

    Two closures with alpha-equivalent closed terms denote the same function,
    which spares the extensional comparison in the common case.
    """
    match v:
        case VLoc(l):
            return Loc(l)
        case VInj(i, x):
            b = closed_term(x)
            return None if b is None else Inj(i, b)
        case VPair(a, b):
            ta, tb = closed_term(a), closed_term(b)
            return None if ta is None or tb is None else Pair(ta, tb)
        case VUnit():
            return Star()
        case Closure(_, lh, env, fun):
            subst = {}
            for x, e in env:
                te = closed_term(e)
                if te is None:
                    return None
                subst[x] = te
            body = rename_locations(fun, dict(lh.pairs))
            return substitute(body, subst)
    return None


def _first_order_reach(c: CoendRep, ty: Type) -> set[int]:
    """Cells reachable from the public cells and the first-order parts of the payload."""
    roots = list(_first_order_locs(c.payload, ty)) + list(c.h.image())
    contents = c.store.as_dict()
    seen: set[int] = set()
    while roots:
        l = roots.pop()
        if l not in seen:
            seen.add(l)
            roots.extend(contents[l].locs())
    return seen


def _first_order_locs(v, ty: Type) -> Iterator[int]:
    match ty:
        case TArrow():
            return
        case TSum(a, b):
            yield from _first_order_locs(v.value, a if v.tag == 1 else b)
        case TProd(a, b):
            yield from _first_order_locs(v.first, a)
            yield from _first_order_locs(v.second, b)
        case _:
            yield from v.locs()


def _functions_in(v, ty: Type) -> Iterator[tuple]:
    match ty:
        case TArrow(a, r):
            yield v, a, r
        case TSum(a, b):
            yield from _functions_in(v.value, a if v.tag == 1 else b)
        case TProd(a, b):
            yield from _functions_in(v.first, a)
            yield from _functions_in(v.second, b)


def compare_reps(sig: Signature, r1: CoendRep, r2: CoendRep, ty: Type, ext: int = 1) -> Verdict:
    cmp = _Cmp(sig, ext)
    status = cmp.reps(r1, r2, ty, cmp.depth)
    return Verdict(status, reason="; ".join(sorted(set(cmp.notes))) if status == APPROX else "")


def compare_bounded(sig: Signature, m1: MonadComp, m2: MonadComp, ty: Type,
                    world_bound: int = 2, ext: int = 1) -> Verdict:
    """Compare two computations at every component whose world has at most
    ``world_bound`` cells, over every store."""
    if m1.base != m2.base:
        raise DenotationError("computations over different worlds")
    cmp = _Cmp(sig, ext)
    status = EQUAL
    for h in _extensions(sig, m1.base, world_bound):
        for s in stores_over(sig, h.cod):
            r1, r2 = m1.component(h, s), m2.component(h, s)
            v = cmp.reps(r1, r2, ty, cmp.depth)
            if v == NOT_EQUAL:
                return Verdict(NOT_EQUAL, (h, s, r1, r2), bound=world_bound)
            status = _worst(status, v)
    reason = "; ".join(sorted(set(cmp.notes))) if status == APPROX else ""
    return Verdict(status, reason=reason, bound=world_bound)


def equal_bounded(sig: Signature, m1: MonadComp, m2: MonadComp, ty: Type,
                  world_bound: int = 2, value_bound: int = 1) -> bool:
    v = compare_bounded(sig, m1, m2, ty, world_bound, value_bound)
    if v.status == APPROX:
        raise Approximate(v.reason)
    return v.equal


def _extensions(sig: Signature, base: World, bound: int) -> Iterator[Injection]:
    for w in enumerate_worlds(sig, max(bound, len(base))):
        if len(w) >= len(base):
            yield from injections(base, w)
    if any(l >= len(base) for l in base.support):
        # non-contiguous base: its identity is not among the enumerated worlds
        yield identity(base)


__all__ = [
    "Closure", "EnvVal", "MonadComp", "Verdict", "Approximate", "p_return", "p_hide", "p_bind",
    "p_strength", "p_action", "t_return", "t_bind", "t_map", "t_strength", "t_dstrength", "t_act",
    "mget", "mset", "minit", "mnew", "t_end_action", "denote_value", "denote_term", "denote",
    "denote_heap", "compare_reps", "compare_bounded", "equal_bounded", "coend_equal",
]
