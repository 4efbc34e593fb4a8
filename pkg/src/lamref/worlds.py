"""Worlds, world injections, and ground semantic values.

A world (heap layout) maps finitely many locations to cell sorts.  Locations
are identified with their natural-number index, so ``#n`` is just ``n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .signature import Signature
from .types import TEmpty, TProd, TRef, TSum, TUnit, Type


class WorldError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class World:
    cells: tuple[tuple[int, str], ...]  # ascending by location

    @staticmethod
    def of(mapping: Mapping[int, str] | Iterable[tuple[int, str]] = ()) -> World:
        return World(tuple(sorted(dict(mapping).items())))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(l for l, _ in self.cells)

    def as_dict(self) -> dict[int, str]:
        return dict(self.cells)

    def sort_of(self, loc: int) -> str:
        for l, s in self.cells:
            if l == loc:
                return s
        raise KeyError(loc)

    def __contains__(self, loc: int) -> bool:
        return any(l == loc for l, _ in self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[tuple[int, str]]:
        return iter(self.cells)

    def extends(self, other: World) -> bool:
        """``self <= other``: ``other`` agrees with ``self`` on its support."""
        d = other.as_dict()
        return all(d.get(l) == s for l, s in self.cells)

    def restrict(self, locs: Iterable[int]) -> World:
        keep = set(locs)
        return World(tuple(c for c in self.cells if c[0] in keep))

    def __str__(self) -> str:
        return "{" + ", ".join(f"#{l}:{s}" for l, s in self.cells) + "}"

    __repr__ = __str__


EMPTY = World(())


def numof(w: World) -> int:
    """Smallest index beyond every location of ``w``."""
    return w.cells[-1][0] + 1 if w.cells else 0


@dataclass(frozen=True, slots=True)
class Injection:
    dom: World
    cod: World
    pairs: tuple[tuple[int, int], ...]  # (source, target), ascending by source

    def __post_init__(self):
        if tuple(l for l, _ in self.pairs) != self.dom.support:
            raise WorldError(f"injection not total on {self.dom}")
        targets = [t for _, t in self.pairs]
        if len(set(targets)) != len(targets):
            raise WorldError("map is not injective")
        cod = self.cod.as_dict()
        for (src, tgt), (_, sort) in zip(self.pairs, self.dom.cells):
            if cod.get(tgt) != sort:
                raise WorldError(f"#{src}:{sort} not sent to a {sort} cell of {self.cod}")

    @staticmethod
    def make(dom: World, cod: World, mapping: Mapping[int, int]) -> Injection:
        return Injection(dom, cod, tuple((l, mapping[l]) for l in dom.support))

    def __call__(self, loc: int) -> int:
        for s, t in self.pairs:
            if s == loc:
                return t
        raise KeyError(loc)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def image(self) -> tuple[int, ...]:
        return tuple(t for _, t in self.pairs)

    def after(self, first: Injection) -> Injection:
        """Composite ``self . first``."""
        if first.cod != self.dom:
            raise WorldError(f"cannot compose: {first.cod} != {self.dom}")
        m = self.as_dict()
        return Injection(first.dom, self.cod, tuple((s, m[t]) for s, t in first.pairs))

    def inverse_partial(self) -> dict[int, int]:
        return {t: s for s, t in self.pairs}

    def is_identity(self) -> bool:
        return self.dom == self.cod and all(s == t for s, t in self.pairs)

    def is_iso(self) -> bool:
        return len(self.dom) == len(self.cod)

    def __str__(self) -> str:
        body = ", ".join(f"#{s}->#{t}" for s, t in self.pairs)
        return f"{self.dom} --[{body}]--> {self.cod}"


def identity(w: World) -> Injection:
    return Injection(w, w, tuple((l, l) for l in w.support))


def inclusion(w: World, w2: World) -> Injection:
    return Injection(w, w2, tuple((l, l) for l in w.support))


def indep_coproduct(w1: World, w2: World) -> tuple[World, Injection, Injection]:
    shift = numof(w1)
    w = World(w1.cells + tuple((shift + l, s) for l, s in w2.cells))
    i1 = Injection(w1, w, tuple((l, l) for l in w1.support))
    i2 = Injection(w2, w, tuple((l, shift + l) for l in w2.support))
    return w, i1, i2


def complement(h: Injection) -> Injection:
    """Inclusion of the cells of ``h.cod`` that ``h`` misses."""
    hit = set(h.image())
    rest = World(tuple(c for c in h.cod.cells if c[0] not in hit))
    return inclusion(rest, h.cod)


def coproduct_map(f: Injection, g: Injection) -> Injection:
    """Functorial action of the independent coproduct on a pair of injections."""
    src, _, _ = indep_coproduct(f.dom, g.dom)
    tgt, _, _ = indep_coproduct(f.cod, g.cod)
    s1, s2 = numof(f.dom), numof(f.cod)
    pairs = [(l, f(l)) for l in f.dom.support] + [(s1 + l, s2 + g(l)) for l in g.dom.support]
    return Injection(src, tgt, tuple(pairs))


@dataclass(frozen=True, slots=True)
class LocalCoproduct:
    world: World
    left: Injection   # from cod of the first injection
    right: Injection  # from cod of the second injection


def local_coproduct(h1: Injection, h2: Injection) -> LocalCoproduct:
    """``w (+) (w1 - h1) (+) (w2 - h2)`` with the two pushes into it."""
    if h1.dom != h2.dom:
        raise WorldError("local coproduct needs a shared domain")
    base = h1.dom
    c1, c2 = complement(h1).dom, complement(h2).dom
    left_world, a_base, a_c1 = indep_coproduct(base, c1)
    world, b_left, b_c2 = indep_coproduct(left_world, c2)

    def push(h: Injection, cinj: Injection) -> Injection:
        back = h.inverse_partial()
        pairs = []
        for l in h.cod.support:
            if l in back:
                pairs.append((l, b_left(a_base(back[l]))))
            else:
                pairs.append((l, cinj(l)))
        return Injection(h.cod, world, tuple(pairs))

    left = push(h1, b_left.after(a_c1))
    right = push(h2, b_c2)
    return LocalCoproduct(world, left, right)


def injections(w1: World, w2: World) -> Iterator[Injection]:
    """Every sort-preserving injection ``w1 -> w2``."""
    by_sort: dict[str, list[int]] = {}
    for l, s in w2.cells:
        by_sort.setdefault(s, []).append(l)
    srcs = w1.cells

    def go(i: int, used: frozenset, acc: list):
        if i == len(srcs):
            yield Injection(w1, w2, tuple(acc))
            return
        l, s = srcs[i]
        for t in by_sort.get(s, ()):
            if t not in used:
                acc.append((l, t))
                yield from go(i + 1, used | {t}, acc)
                acc.pop()

    yield from go(0, frozenset(), [])


def enumerate_worlds(sig: Signature, max_cells: int) -> list[World]:
    out = []
    for k in range(max_cells + 1):
        for sorts in itertools.product(sig.sorts, repeat=k):
            out.append(World(tuple(enumerate(sorts))))
    return out


def extensions(sig: Signature, base: World, max_cells: int) -> Iterator[Injection]:
    """Injections out of ``base`` into contiguous worlds of at most ``max_cells`` cells."""
    for w in enumerate_worlds(sig, max_cells):
        if len(w) >= len(base):
            yield from injections(base, w)


# ---------------------------------------------------------------- values


class SemValue:
    __slots__ = ()

    def act(self, h: Injection) -> SemValue:
        raise NotImplementedError

    def locs(self) -> Iterator[int]:
        return iter(())


@dataclass(frozen=True, slots=True)
class VUnit(SemValue):
    def act(self, h):
        return self

    def __str__(self):
        return "()"


@dataclass(frozen=True, slots=True)
class VInj(SemValue):
    tag: int
    value: SemValue

    def act(self, h):
        return VInj(self.tag, self.value.act(h))

    def locs(self):
        return self.value.locs()

    def __str__(self):
        return f"inj{self.tag} {_atom(self.value)}"


@dataclass(frozen=True, slots=True)
class VPair(SemValue):
    first: SemValue
    second: SemValue

    def act(self, h):
        return VPair(self.first.act(h), self.second.act(h))

    def locs(self):
        yield from self.first.locs()
        yield from self.second.locs()

    def __str__(self):
        return f"({self.first}, {self.second})"


@dataclass(frozen=True, slots=True)
class VLoc(SemValue):
    index: int

    def act(self, h):
        return VLoc(h(self.index))

    def locs(self):
        yield self.index

    def __str__(self):
        return f"#{self.index}"


UNIT = VUnit()
TRUE = VInj(1, UNIT)
FALSE = VInj(2, UNIT)


def _atom(v: SemValue) -> str:
    s = str(v)
    return f"({s})" if isinstance(v, VInj) else s


def interp_type(sig: Signature, ty: Type, w: World) -> list[SemValue]:
    """Elements of the interpretation of a full ground type at ``w``."""
    match ty:
        case TEmpty():
            return []
        case TUnit():
            return [UNIT]
        case TRef(sort):
            return [VLoc(l) for l, s in w.cells if s == sort]
        case TSum(a, b):
            return [VInj(1, v) for v in interp_type(sig, a, w)] + [
                VInj(2, v) for v in interp_type(sig, b, w)]
        case TProd(a, b):
            right = interp_type(sig, b, w)
            return [VPair(x, y) for x in interp_type(sig, a, w) for y in right]
    raise WorldError(f"not a full ground type: {ty}")


def interp_action(sig: Signature, ty: Type, h: Injection, v: SemValue) -> SemValue:
    return v.act(h)


def member(sig: Signature, ty: Type, w: World, v: SemValue) -> bool:
    """Whether ``v`` lies in the interpretation of ``ty`` at ``w``."""
    match ty, v:
        case TUnit(), VUnit():
            return True
        case TRef(sort), VLoc(l):
            return l in w and w.sort_of(l) == sort
        case TSum(a, b), VInj(i, x):
            return member(sig, a if i == 1 else b, w, x)
        case TProd(a, b), VPair(x, y):
            return member(sig, a, w, x) and member(sig, b, w, y)
    return False


def find_injection(w1: World, w2: World) -> Injection | None:
    return next(injections(w1, w2), None)
