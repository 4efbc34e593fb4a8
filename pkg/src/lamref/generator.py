"""Type-directed random generation of well-typed closed terms.

Every production builds a term whose typing derivation is immediate from
the types chosen on the way down, so the output is well-typed by
construction; the tests still re-check each term with the type checker.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .signature import Signature
from .syntax import (App, Assign, Binding, Deref, Fun, Inj, Loc, MatchEmpty, MatchProd, MatchSum,
                     New, Pair, Star, Term, Var)
from .types import TArrow, TEmpty, TProd, TRef, TSum, TUnit, Type, refs_of
from .worlds import World


class GenerationExhausted(Exception):
    pass


@dataclass
class _Gen:
    sig: Signature
    layout: World
    rng: random.Random
    first_order: bool = False
    counter: int = 0

    def name(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    # -------------------------------------------------------- types

    def gen_type(self, depth: int, arrows: bool = True) -> Type:
        r = self.rng.random()
        if depth <= 0 or r < 0.3:
            return self.rng.choice([TUnit(), TUnit(), self.bool_(), self.ref_type()])
        if r < 0.55:
            return TSum(self.gen_type(depth - 1, arrows), self.gen_type(depth - 1, arrows))
        if r < 0.8 or not arrows:
            return TProd(self.gen_type(depth - 1, arrows), self.gen_type(depth - 1, arrows))
        return TArrow(self.gen_type(depth - 1, arrows), self.gen_type(depth - 1, arrows))

    def bool_(self) -> Type:
        return TSum(TUnit(), TUnit())

    def ref_type(self) -> Type:
        return TRef(self.rng.choice(self.sig.sorts))

    # -------------------------------------------------------- values

    def refs_available(self, ctx: dict[str, Type]) -> set[str]:
        out = {s for _, s in self.layout}
        out |= {t.sort for t in ctx.values() if isinstance(t, TRef)}
        return out

    def value_possible(self, ty: Type, refs: set[str]) -> bool:
        match ty:
            case TEmpty():
                return False
            case TUnit() | TArrow():
                return True
            case TRef(s):
                return s in refs
            case TSum(a, b):
                return self.value_possible(a, refs) or self.value_possible(b, refs)
            case TProd(a, b):
                return self.value_possible(a, refs) and self.value_possible(b, refs)
        return False

    def gen_value(self, ctx: dict[str, Type], ty: Type, size: int) -> Term:
        refs = self.refs_available(ctx)
        same = [x for x, t in ctx.items() if t == ty]
        if same and self.rng.random() < 0.4:
            return Var(self.rng.choice(same))
        match ty:
            case TUnit():
                return Star()
            case TRef(s):
                choices = [Var(x) for x, t in ctx.items() if t == ty]
                choices += [Loc(l) for l, k in self.layout if k == s]
                if not choices:
                    raise GenerationExhausted(f"no reference of sort {s} in scope")
                return self.rng.choice(choices)
            case TSum(a, b):
                ok = [i for i, t in ((1, a), (2, b)) if self.value_possible(t, refs)]
                if not ok:
                    raise GenerationExhausted("uninhabited sum")
                i = self.rng.choice(ok)
                return Inj(i, self.gen_value(ctx, a if i == 1 else b, size - 1))
            case TProd(a, b):
                return Pair(self.gen_value(ctx, a, size // 2), self.gen_value(ctx, b, size // 2))
            case TArrow(a, b):
                x = self.name("x")
                return Fun(x, a, self.gen(dict(ctx, **{x: a}), b, size - 1))
        raise GenerationExhausted(f"no closed value of type {ty}")

    # -------------------------------------------------------- terms

    def gen(self, ctx: dict[str, Type], ty: Type, size: int) -> Term:
        refs = self.refs_available(ctx)
        if size <= 1:
            if self.value_possible(ty, refs):
                return self.gen_value(ctx, ty, 1)
            return self.alloc(ctx, ty, 2)
        options = ["value", "match_sum", "match_prod", "app", "new", "absurd"]
        if self.deref_sorts(ty):
            options.append("deref")
        if ty == TUnit():
            options.append("assign")
        match ty:
            case TSum():
                options += ["inj"] * 2
            case TProd():
                options += ["pair"] * 2
            case TArrow():
                options += ["value"]
            case TRef():
                options += ["new"]
        for _ in range(8):
            kind = self.rng.choice(options)
            try:
                return getattr(self, "p_" + kind)(ctx, ty, size)
            except GenerationExhausted:
                continue
        if self.value_possible(ty, refs):
            return self.gen_value(ctx, ty, size)
        return self.alloc(ctx, ty, size)

    def deref_sorts(self, ty: Type) -> list[str]:
        return [s for s in self.sig.sorts if self.sig.typeof(s) == ty]

    def p_value(self, ctx, ty, size):
        if not self.value_possible(ty, self.refs_available(ctx)):
            raise GenerationExhausted("no value")
        return self.gen_value(ctx, ty, size)

    def p_inj(self, ctx, ty, size):
        i = self.rng.choice([1, 2])
        return Inj(i, self.gen(ctx, ty.left if i == 1 else ty.right, size - 1))

    def p_pair(self, ctx, ty, size):
        return Pair(self.gen(ctx, ty.left, size // 2), self.gen(ctx, ty.right, size // 2))

    def scrutinee_type(self) -> Type:
        return self.gen_type(1, arrows=not self.first_order)

    def p_match_sum(self, ctx, ty, size):
        st = TSum(self.scrutinee_type(), self.scrutinee_type())
        x1, x2 = self.name("a"), self.name("b")
        s = self.gen(ctx, st, size // 3)
        return MatchSum(s, x1, self.gen(dict(ctx, **{x1: st.left}), ty, size // 3),
                        x2, self.gen(dict(ctx, **{x2: st.right}), ty, size // 3))

    def p_match_prod(self, ctx, ty, size):
        st = TProd(self.scrutinee_type(), self.scrutinee_type())
        x1, x2 = self.name("p"), self.name("q")
        s = self.gen(ctx, st, size // 2)
        return MatchProd(s, x1, x2, self.gen(dict(ctx, **{x1: st.left, x2: st.right}), ty, size // 2))

    def p_app(self, ctx, ty, size):
        arg = self.scrutinee_type()
        return App(self.gen(ctx, TArrow(arg, ty), size // 2), self.gen(ctx, arg, size // 2))

    def p_deref(self, ctx, ty, size):
        s = self.rng.choice(self.deref_sorts(ty))
        return Deref(self.gen(ctx, TRef(s), size - 1))

    def p_assign(self, ctx, ty, size):
        s = self.rng.choice(self.sig.sorts)
        return Assign(self.gen(ctx, TRef(s), size // 2),
                      self.gen(ctx, self.sig.typeof(s), size // 2))

    def p_absurd(self, ctx, ty, size):
        """Bind an unused function out of the empty type, so empty matches appear."""
        f, z = self.name("f"), self.name("z")
        absurd = Fun(z, TEmpty(), MatchEmpty(Var(z), ty))
        body = self.gen(dict(ctx, **{f: TArrow(TEmpty(), ty)}), ty, size - 1)
        return App(Fun(f, TArrow(TEmpty(), ty), body), absurd)

    def p_new(self, ctx, ty, size):
        return self.alloc(ctx, ty, size)

    def alloc(self, ctx, ty, size):
        """``new`` with one to three binders, closed under the sorts their
        initialisers cannot avoid mentioning."""
        want = self.rng.choice(self.sig.sorts)
        if isinstance(ty, TRef):
            want = ty.sort
        sorts = [want]
        for _ in range(self.rng.randint(0, 2)):
            sorts.append(self.rng.choice(self.sig.sorts))
        base_refs = self.refs_available(ctx)
        changed = True
        while changed:
            changed = False
            avail = base_refs | set(sorts)
            for s in list(sorts):
                content = self.sig.typeof(s)
                if not self.value_possible(content, avail):
                    missing = sorted(refs_of(content) - avail)
                    sorts.append(missing[0])
                    changed = True
                    break
            if len(sorts) > 3:
                raise GenerationExhausted("allocation needs too many cells")
        names = [self.name("r") for _ in sorts]
        inner = dict(ctx)
        inner.update({x: TRef(s) for x, s in zip(names, sorts)})
        binds = []
        for x, s in zip(names, sorts):
            binds.append(Binding(x, s, self.gen_value_pref(inner, self.sig.typeof(s), names)))
        body_size = max(1, size - 2)
        if isinstance(ty, TRef) and self.rng.random() < 0.5:
            body = Var(names[0])
        else:
            body = self.gen(inner, ty, body_size)
        return New(tuple(binds), body)

    def gen_value_pref(self, ctx, ty, names):
        """Initialiser, preferring references to the cells being allocated."""
        match ty:
            case TRef(s):
                local = [x for x in names if ctx[x] == ty]
                if local and self.rng.random() < 0.7:
                    return Var(self.rng.choice(local))
                return self.gen_value(ctx, ty, 1)
            case TSum(a, b):
                refs = self.refs_available(ctx)
                ok = [i for i, t in ((1, a), (2, b)) if self.value_possible(t, refs)]
                i = self.rng.choice(ok)
                return Inj(i, self.gen_value_pref(ctx, a if i == 1 else b, names))
            case TProd(a, b):
                return Pair(self.gen_value_pref(ctx, a, names), self.gen_value_pref(ctx, b, names))
        return self.gen_value(ctx, ty, 1)


def gen_layout(sig: Signature, rng: random.Random, max_cells: int = 2) -> World:
    """A layout over which some heap exists: the chosen sorts are closed
    under the sorts their contents cannot avoid (so it may exceed
    ``max_cells`` by the cells needed for that)."""
    k = rng.randint(0, max_cells)
    sorts = [rng.choice(sig.sorts) for _ in range(k)]
    probe = _Gen(sig, World(()), rng)
    while True:
        have = set(sorts)
        missing = [sorted(refs_of(sig.typeof(s)) - have)[0] for s in sorts
                   if not probe.value_possible(sig.typeof(s), have)]
        if not missing:
            return World(tuple(enumerate(sorts)))
        sorts.append(missing[0])


def gen_well_typed(sig: Signature, size: int, seed: int, *, first_order: bool = False,
                   max_layout: int = 2, retries: int = 50) -> tuple[World, Term, Type]:
    """A closed judgement ``|-_w t : ty``, deterministic in ``seed``.

    With ``first_order`` the result type has no function types.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    rng = random.Random(seed)
    for _ in range(retries):
        layout = gen_layout(sig, rng, max_layout)
        g = _Gen(sig, layout, rng, first_order)
        ty = g.gen_type(2, arrows=not first_order)
        try:
            return layout, g.gen({}, ty, size), ty
        except (GenerationExhausted, RecursionError):
            continue
    raise GenerationExhausted(f"no term generated for seed {seed}")


def gen_of_type(sig: Signature, layout: World, ty: Type, size: int, seed: int,
                retries: int = 50) -> Term:
    """A closed term of the given type at ``layout``, deterministic in ``seed``."""
    rng = random.Random(seed)
    for _ in range(retries):
        try:
            return _Gen(sig, layout, rng).gen({}, ty, size)
        except (GenerationExhausted, RecursionError):
            continue
    raise GenerationExhausted(f"no term of type {ty} for seed {seed}")


__all__ = ["gen_well_typed", "gen_of_type", "GenerationExhausted", "gen_layout"]
