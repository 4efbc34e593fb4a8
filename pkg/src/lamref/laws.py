"""Executable checks of the algebraic laws of P and T at small worlds.

Computations and Kleisli maps are drawn from small families built out of
the monad operations themselves (so they are natural by construction);
worlds, injections and stores are enumerated exhaustively.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterator

from .denote import (MonadComp, mget, mnew, mset, p_action, p_bind, p_hide, p_return, p_strength,
                     t_bind, t_dstrength, t_map, t_return, t_strength)
from .harness import TestReport
from .initialisations import (CoendRep, Heaplet, Initialisation, coend_equal, complement,
                              enumerate_inits, enumerate_reps, gc_canonical, store, store_update,
                              stores_action, stores_over)
from .signature import Signature
from .types import TRef, TSum, TUnit
from .worlds import (EMPTY, FALSE, TRUE, UNIT, Injection, VLoc, VPair, World, enumerate_worlds,
                     identity, injections, interp_type)

BOOL = TSum(TUnit(), TUnit())


def bool_sorts(sig: Signature) -> list[str]:
    return [s for s in sig.sorts if sig.typeof(s) == BOOL]


def components(sig: Signature, base: World, bound: int) -> Iterator[tuple[Injection, Heaplet]]:
    for w in enumerate_worlds(sig, bound):
        for h in injections(base, w):
            for s in stores_over(sig, w):
                yield h, s


def same_comp(sig: Signature, m1: MonadComp, m2: MonadComp, bound: int):
    """First component where two computations differ, or ``None``."""
    for h, s in components(sig, m1.base, bound):
        r1, r2 = m1.component(h, s), m2.component(h, s)
        if r1 != r2:
            return h, s, r1, r2
    return None


def _fill(sig: Signature, sort: str, w: World):
    """Some element of the content type of ``sort`` at ``w``, if any."""
    vals = interp_type(sig, sig.typeof(sort), w)
    return vals[0] if vals else None


# ---------------------------------------------------------------- sample computations


def sample_computations(sig: Signature, w: World) -> list[tuple[str, MonadComp]]:
    """Computations over ``w`` returning a location or a unit."""
    out: list[tuple[str, MonadComp]] = [("return ()", t_return(w, UNIT))]
    for l, s in w:
        out.append((f"return #{l}", t_return(w, VLoc(l))))
        out.append((f"get #{l}", t_map(t_strength(VLoc(l), mget(w, l)), lambda p: p.first)))
        for v in interp_type(sig, sig.typeof(s), w)[:2]:
            out.append((f"#{l} := {v}", mset(w, l, v)))
    for s in sig.sorts:
        w0 = World(((0, s),))
        from .worlds import indep_coproduct
        ext, _, i2 = indep_coproduct(w, w0)
        data = _fill(sig, s, ext)
        if data is not None:
            out.append((f"new {s}", mnew(w, w0, {0: data})))
    return out


def sample_kleisli(sig: Signature) -> list[tuple[str, Callable]]:
    """Kleisli maps on payloads that are locations or units."""

    def k_return(w, y):
        return t_return(w, y)

    def k_flip(w, y):
        if isinstance(y, VLoc) and sig.typeof(w.sort_of(y.index)) == BOOL:
            l = y.index
            return t_bind(t_strength(y, mget(w, l)), lambda w2, p: t_map(
                t_strength(p.first, mset(w2, p.first.index, FALSE if p.second == TRUE else TRUE)),
                lambda q: q.first))
        return t_return(w, y)

    def k_drop(w, y):
        return t_return(w, UNIT)

    def k_alloc(w, y):
        from .worlds import indep_coproduct
        for s in sig.sorts:
            w0 = World(((0, s),))
            ext, i1, _ = indep_coproduct(w, w0)
            data = _fill(sig, s, ext)
            if data is not None:
                return t_map(t_strength(y, mnew(w, w0, {0: data})), lambda p: p.first)
        return t_return(w, y)

    return [("return", k_return), ("flip", k_flip), ("drop", k_drop), ("alloc", k_alloc)]


# ---------------------------------------------------------------- T laws


def check_t_laws(sig: Signature, bound: int = 2) -> TestReport:
    rep = TestReport("monad T", bounds={"world": bound})
    ks = sample_kleisli(sig)
    for w in enumerate_worlds(sig, bound):
        comps = sample_computations(sig, w)
        values = [UNIT] + [VLoc(l) for l in w.support]
        for x in values:
            for kn, k in ks:
                rep.tried += 1
                d = same_comp(sig, t_bind(t_return(w, x), k), k(w, x), bound)
                if d:
                    rep.fail(law="left unit", world=w, value=x, kleisli=kn, at=d[0], store=d[1])
        for cn, m in comps:
            rep.tried += 1
            d = same_comp(sig, t_bind(m, t_return), m, bound)
            if d:
                rep.fail(law="right unit", world=w, comp=cn, at=d[0], store=d[1])
            for (kn1, k1), (kn2, k2) in itertools.product(ks, ks):
                rep.tried += 1
                lhs = t_bind(t_bind(m, k1), k2)
                rhs = t_bind(m, lambda w2, y, k1=k1, k2=k2: t_bind(k1(w2, y), k2))
                d = same_comp(sig, lhs, rhs, bound)
                if d:
                    rep.fail(law="associativity", world=w, comp=cn, k1=kn1, k2=kn2, at=d[0])
    return rep


def check_strength_laws(sig: Signature, bound: int = 2) -> TestReport:
    """The four coherence axioms of a strong monad."""
    rep = TestReport("strength T", bounds={"world": bound})
    ks = sample_kleisli(sig)
    for w in enumerate_worlds(sig, bound):
        values = [UNIT] + [VLoc(l) for l in w.support]
        for cn, m in sample_computations(sig, w):
            # unit: projecting away the unit component
            rep.tried += 1
            d = same_comp(sig, t_map(t_strength(UNIT, m), lambda p: p.second), m, bound)
            if d:
                rep.fail(law="strength unit", world=w, comp=cn, at=d[0])
            for a, b in itertools.product(values, values):
                rep.tried += 1
                lhs = t_map(t_strength(VPair(a, b), m),
                            lambda p: VPair(p.first.first, VPair(p.first.second, p.second)))
                rhs = t_strength(a, t_strength(b, m))
                d = same_comp(sig, lhs, rhs, bound)
                if d:
                    rep.fail(law="strength associativity", world=w, comp=cn, a=a, b=b, at=d[0])
            for a in values:
                for kn, k in ks:
                    rep.tried += 1
                    lhs = t_strength(a, t_bind(m, k))
                    rhs = t_bind(t_strength(a, m), lambda w2, p, k=k: t_strength(p.first, k(w2, p.second)))
                    d = same_comp(sig, lhs, rhs, bound)
                    if d:
                        rep.fail(law="strength/multiplication", world=w, comp=cn, a=a, kleisli=kn, at=d[0])
        for a, x in itertools.product(values, values):
            rep.tried += 1
            d = same_comp(sig, t_strength(a, t_return(w, x)), t_return(w, VPair(a, x)), bound)
            if d:
                rep.fail(law="strength/unit", world=w, a=a, x=x, at=d[0])
    return rep


def check_dstrength_order(sig: Signature, bound: int = 2) -> TestReport:
    """Double strength runs its left argument first."""
    rep = TestReport("double strength", bounds={"world": bound})
    for w in enumerate_worlds(sig, bound):
        comps = sample_computations(sig, w)
        for (n1, m1), (n2, m2) in itertools.product(comps, comps):
            rep.tried += 1
            lhs = t_dstrength(m1, m2)
            rhs = t_bind(t_strength(identity_env(w), m1), lambda w2, p, m2=m2: t_map(
                t_strength(p.second, _act_comp(p.first, m2)), lambda q: q))
            d = same_comp(sig, lhs, rhs, bound)
            if d:
                rep.fail(law="double strength", world=w, left=n1, right=n2, at=d[0])
    return rep


class _Anchor:
    """A value recording how the original world sits in a later one."""
    __slots__ = ("h",)

    def __init__(self, h: Injection):
        self.h = h

    def act(self, g: Injection) -> _Anchor:
        return _Anchor(g.after(self.h))

    def locs(self):
        return iter(self.h.image())

    def __eq__(self, other):
        return isinstance(other, _Anchor) and self.h == other.h

    def __hash__(self):
        return hash(self.h)


def identity_env(w: World) -> _Anchor:
    return _Anchor(identity(w))


def _act_comp(anchor: _Anchor, m: MonadComp) -> MonadComp:
    from .denote import t_act
    return t_act(anchor.h, m)


def check_end_condition(sig: Signature, bound: int = 2) -> TestReport:
    """Components agree along initialisations of the index category."""
    rep = TestReport("end condition", bounds={"world": bound})
    for w in enumerate_worlds(sig, 1):
        for cn, m in sample_computations(sig, w):
            for w1 in enumerate_worlds(sig, bound):
                for h1 in injections(w, w1):
                    for s1 in stores_over(sig, w1):
                        r1 = m.component(h1, s1)
                        for w2 in enumerate_worlds(sig, bound):
                            for u in injections(w1, w2):
                                for ini in enumerate_inits(sig, u):
                                    rep.tried += 1
                                    s2 = stores_action(ini, s1)
                                    lhs = m.component(u.after(h1), s2)
                                    rhs = gc_canonical(p_action(ini, r1))
                                    if lhs != rhs:
                                        rep.fail(comp=cn, h1=h1, init=ini, left=lhs.render(),
                                                 right=rhs.render())
    return rep


# ---------------------------------------------------------------- P laws


def p_kleisli(sig: Signature) -> list[tuple[str, Callable]]:
    """Maps ``(world, payload, store) -> P`` that act only through the payload."""

    def g_return(w, x, s):
        return p_return(w, x, s)

    def g_drop(w, x, s):
        return p_return(w, UNIT, s)

    def g_flip(w, x, s):
        if isinstance(x, VLoc) and sig.typeof(w.sort_of(x.index)) == BOOL:
            cur = dict(s.items())[x.index]
            return p_return(w, x, store_update(s, x.index, FALSE if cur == TRUE else TRUE))
        return p_return(w, x, s)

    def g_alloc(w, x, s):
        m = sample_kleisli(sig)[3][1](w, x)
        return m.at(s)

    return [("return", g_return), ("drop", g_drop), ("flip", g_flip), ("alloc", g_alloc)]


def p_elements(sig: Signature, base: World, bound: int) -> Iterator[CoendRep]:
    payload_types = [TUnit()] + [TRef(s) for s in sig.sorts]
    seen = set()
    for r in enumerate_reps(sig, base, payload_types, bound):
        c = gc_canonical(r)
        if c not in seen:
            seen.add(c)
            yield c


def check_p_laws(sig: Signature, bound: int = 2) -> TestReport:
    rep = TestReport("monad P", bounds={"world": bound})
    gs = p_kleisli(sig)
    for w in enumerate_worlds(sig, bound):
        for s in stores_over(sig, w):
            for x in [UNIT] + [VLoc(l) for l in w.support]:
                for gn, g in gs:
                    rep.tried += 1
                    if not coend_equal(p_bind(p_return(w, x, s), g), g(w, x, s)):
                        rep.fail(law="left unit", world=w, value=x, kleisli=gn)
        for r in p_elements(sig, w, bound):
            rep.tried += 1
            if not coend_equal(p_bind(r, p_return), r):
                rep.fail(law="right unit", rep=r.render())
            for (n1, g1), (n2, g2) in itertools.product(gs, gs):
                rep.tried += 1
                lhs = p_bind(p_bind(r, g1), g2)
                rhs = p_bind(r, lambda v, x, s, g1=g1, g2=g2: p_bind(g1(v, x, s), g2))
                if not coend_equal(lhs, rhs):
                    rep.fail(law="associativity", rep=r.render(), g1=n1, g2=n2)
            for a in [UNIT] + [VLoc(l) for l in w.support]:
                rep.tried += 1
                lhs = p_strength(a, p_bind(r, gs[3][1]))
                rhs = p_bind(p_strength(a, r), lambda v, p, s: p_strength(p.first, gs[3][1](v, p.second, s)))
                if not coend_equal(lhs, rhs):
                    rep.fail(law="strength/bind", rep=r.render(), a=a)
    return rep


# ---------------------------------------------------------------- hiding axioms


def check_hiding_axioms(sig: Signature, bound: int = 2, square_bound: int = 3) -> TestReport:
    rep = TestReport("hiding algebra", bounds={"world": bound, "square": square_bound})
    worlds = enumerate_worlds(sig, bound)
    for w2 in worlds:
        elems = list(p_elements(sig, w2, bound))
        for r in elems:
            rep.tried += 1
            if p_hide(identity(w2), r) != gc_canonical(r):
                rep.fail(axiom="hide id", rep=r.render())
        for w1 in worlds:
            for h2 in injections(w1, w2):
                for w0 in worlds:
                    for h1 in injections(w0, w1):
                        for r in elems:
                            rep.tried += 1
                            if p_hide(h1, p_hide(h2, r)) != p_hide(h2.after(h1), r):
                                rep.fail(axiom="hide composition", h1=h1, h2=h2, rep=r.render())
    for sq in qualifying_squares(sig, bound, square_bound):
        i1, h1, i2, h2 = sq
        for r in p_elements(sig, i2.dom, bound):
            rep.tried += 1
            lhs = p_action(i1, p_hide(h1, r))
            rhs = p_hide(h2, p_action(i2, r))
            if lhs != rhs:
                rep.fail(axiom="initialisation square", i1=i1, h1=h1, i2=i2, h2=h2, rep=r.render())
    return rep


def qualifying_squares(sig: Signature, bound: int, square_bound: int):
    """Squares ``i1 : w1 -> w2``, ``h1 : w1 -> w3``, ``i2 : w3 -> w4``,
    ``h2 : w2 -> w4`` meeting the premises of the third hiding axiom."""
    small = enumerate_worlds(sig, bound)
    for w1 in enumerate_worlds(sig, 1):
        for w2 in small:
            for u1 in injections(w1, w2):
                for i1 in enumerate_inits(sig, u1):
                    for w3 in small:
                        for h1 in injections(w1, w3):
                            for w4 in enumerate_worlds(sig, square_bound):
                                for u2 in injections(w3, w4):
                                    for h2 in injections(w2, w4):
                                        if u2.after(h1) != h2.after(u1):
                                            continue
                                        if not _pullback(u1, h1, u2, h2):
                                            continue
                                        for i2 in enumerate_inits(sig, u2):
                                            if _data_promoted(i1, h2, i2):
                                                yield i1, h1, i2, h2


def _pullback(u1, h1, u2, h2) -> bool:
    back2 = u2.inverse_partial()
    for l2 in u1.cod.support:
        t = h2(l2)
        if t in back2:
            l3 = back2[t]
            if not any(u1(l1) == l2 and h1(l1) == l3 for l1 in u1.dom.support):
                return False
    return True


def _data_promoted(i1: Initialisation, h2: Injection, i2: Initialisation) -> bool:
    d2 = i2.data.as_dict()
    for l2, v in i1.data.items():
        l4 = h2(l2)
        if l4 not in d2 or d2[l4] != v.act(h2):
            return False
    return True


# ---------------------------------------------------------------- masking lemmas


def check_invertible_unit(sig: Signature, bound: int = 3) -> TestReport:
    """For a world whose cells hold no references, every element of P Stores w
    is ``return`` of exactly one store."""
    rep = TestReport("invertible unit", bounds={"world": bound})
    for w in enumerate_worlds(sig, bound):
        if not all(not _refs(sig, s) for _, s in w):
            continue
        images = {}
        for s in stores_over(sig, w):
            rep.tried += 1
            c = gc_canonical(p_return(w, UNIT, s))
            if c in images:
                rep.fail(world=w, error="unit not injective", store=s)
            images[c] = s
        for r in enumerate_reps(sig, w, [TUnit()], bound):
            rep.tried += 1
            if gc_canonical(r) not in images:
                rep.fail(world=w, error="unit not surjective", rep=r.render())
    return rep


def _refs(sig: Signature, sort: str) -> bool:
    from .types import refs_of
    return bool(refs_of(sig.typeof(sort)))


def check_invertible_strength(sig: Signature, bound: int = 2) -> TestReport:
    """Strength with a constant left factor (booleans) is a bijection."""
    rep = TestReport("invertible strength", bounds={"world": bound})
    payload_types = [TUnit()] + [TRef(s) for s in sig.sorts]
    for w in enumerate_worlds(sig, bound):
        elems = list(p_elements(sig, w, bound))
        images = {}
        for x in (TRUE, FALSE):
            for r in elems:
                rep.tried += 1
                c = p_strength(x, r)
                if c in images:
                    rep.fail(world=w, error="strength not injective", x=x, rep=r.render())
                images[c] = (x, r)
        for ty in payload_types:
            for r in enumerate_reps(sig, w, [TProd_(BOOL, ty)], bound):
                rep.tried += 1
                if gc_canonical(r) not in images:
                    rep.fail(world=w, error="strength not surjective", rep=r.render())
    return rep


def TProd_(a, b):
    from .types import TProd
    return TProd(a, b)


__all__ = [
    "check_t_laws", "check_strength_laws", "check_dstrength_order", "check_end_condition",
    "check_p_laws", "check_hiding_axioms", "qualifying_squares", "check_invertible_unit",
    "check_invertible_strength", "sample_computations", "sample_kleisli",
]
