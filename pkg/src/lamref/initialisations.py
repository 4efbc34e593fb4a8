"""Heaplets, initialisations, stores, and coend representatives.

A representative ``q_h(x, sigma)`` pairs a public world ``base`` with an
injection ``h : base -> priv`` into a world that may hold extra private
cells, a payload ``x`` living at ``priv`` and a full store over ``priv``.
Two representatives name the same element of the coend when a chain of
initialisation moves connects them.  :func:`gc_canonical` decides this by
dropping unreachable private cells and renaming the rest in traversal
order; :func:`coend_equal_oracle` searches the moves directly and is kept
as an independent cross-check.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .signature import Signature
from .worlds import (EMPTY, Injection, SemValue, World, WorldError, complement, identity,
                     inclusion, indep_coproduct, injections, interp_type, local_coproduct,
                     member, numof)


class UnknownLocation(Exception):
    def __init__(self, loc: int):
        self.loc = loc
        super().__init__(f"#{loc} is not a cell of the store")


class BaseMismatch(Exception):
    pass


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------- heaplets


@dataclass(frozen=True, slots=True)
class Heaplet:
    shape: World
    ambient: World
    values: tuple[SemValue, ...]  # aligned with shape.cells

    def __post_init__(self):
        if len(self.values) != len(self.shape):
            raise WorldError("heaplet contents must cover its shape")

    @staticmethod
    def make(shape: World, ambient: World, contents: Mapping[int, SemValue]) -> Heaplet:
        return Heaplet(shape, ambient, tuple(contents[l] for l in shape.support))

    def as_dict(self) -> dict[int, SemValue]:
        return dict(zip(self.shape.support, self.values))

    def items(self) -> Iterator[tuple[int, SemValue]]:
        return zip(self.shape.support, self.values)

    def well_formed(self, sig: Signature) -> bool:
        return all(member(sig, sig.typeof(s), self.ambient, v)
                   for (_, s), v in zip(self.shape.cells, self.values))

    def __str__(self) -> str:
        return "{" + ", ".join(f"#{l}:{s} = {v}" for (l, s), v in zip(self.shape.cells, self.values)) + "}"


Store = Heaplet


def store(w: World, contents: Mapping[int, SemValue]) -> Heaplet:
    return Heaplet.make(w, w, contents)


EMPTY_STORE = Heaplet(EMPTY, EMPTY, ())


def heaplet_concat(r1: Heaplet, r2: Heaplet) -> Heaplet:
    if r1.ambient != r2.ambient:
        raise WorldError("heaplets over different ambient worlds")
    shape, _, _ = indep_coproduct(r1.shape, r2.shape)
    return Heaplet(shape, r1.ambient, r1.values + r2.values)


def heaplet_contra(h: Injection, rho: Heaplet) -> Heaplet:
    """Projection along ``h : w -> rho.shape``."""
    if h.cod != rho.shape:
        raise WorldError("contravariant action needs cod h = shape")
    d = rho.as_dict()
    return Heaplet(h.dom, rho.ambient, tuple(d[t] for _, t in h.pairs))


def heaplet_co(h: Injection, rho: Heaplet) -> Heaplet:
    """Push every stored value along ``h : rho.ambient -> w``."""
    if h.dom != rho.ambient:
        raise WorldError("covariant action needs dom h = ambient")
    return Heaplet(rho.shape, h.cod, tuple(v.act(h) for v in rho.values))


def store_lookup(sigma: Heaplet, loc: int) -> SemValue:
    for l, v in sigma.items():
        if l == loc:
            return v
    raise UnknownLocation(loc)


def store_update(sigma: Heaplet, loc: int, x: SemValue) -> Heaplet:
    if loc not in sigma.shape:
        raise UnknownLocation(loc)
    return Heaplet(sigma.shape, sigma.ambient,
                   tuple(x if l == loc else v for l, v in sigma.items()))


def stores_over(sig: Signature, w: World) -> Iterator[Heaplet]:
    """Every store over ``w``."""
    choices = [interp_type(sig, sig.typeof(s), w) for _, s in w.cells]
    for vals in itertools.product(*choices):
        yield Heaplet(w, w, vals)


def count_stores(sig: Signature, w: World) -> int:
    n = 1
    for _, s in w.cells:
        n *= len(interp_type(sig, sig.typeof(s), w))
    return n


# ---------------------------------------------------------------- initialisations


@dataclass(frozen=True, slots=True)
class Initialisation:
    inj: Injection
    data: Heaplet  # shape = cod - inj, ambient = cod

    def __post_init__(self):
        if self.data.shape != complement(self.inj).dom or self.data.ambient != self.inj.cod:
            raise WorldError("initialisation data must cover exactly the new cells")

    @property
    def dom(self) -> World:
        return self.inj.dom

    @property
    def cod(self) -> World:
        return self.inj.cod

    @staticmethod
    def make(inj: Injection, data: Mapping[int, SemValue]) -> Initialisation:
        shape = complement(inj).dom
        return Initialisation(inj, Heaplet.make(shape, inj.cod, data))

    def __str__(self) -> str:
        return f"{self.inj} with {self.data}"


def init_identity(w: World) -> Initialisation:
    return Initialisation(identity(w), Heaplet(EMPTY, w, ()))


def renaming(h: Injection) -> Initialisation:
    """A bijective injection seen as an initialisation with no data."""
    if not h.is_iso():
        raise WorldError("renaming needs a bijection")
    return Initialisation(h, Heaplet(EMPTY, h.cod, ()))


def compose_init(i1: Initialisation, i2: Initialisation) -> Initialisation:
    """``i2 . i1``: compose injections, append ``i1``'s data pushed along ``i2``."""
    if i1.cod != i2.dom:
        raise WorldError("initialisations do not compose")
    u = i2.inj
    data = i2.data.as_dict()
    for l, v in i1.data.items():
        data[u(l)] = v.act(u)
    return Initialisation.make(u.after(i1.inj), data)


def init_from_store(sigma: Heaplet) -> Initialisation:
    w = sigma.shape
    return Initialisation(Injection(EMPTY, w, ()), sigma)


def stores_action(i: Initialisation, sigma: Heaplet) -> Heaplet:
    """Promote ``sigma`` along ``i`` and append the initialisation data."""
    if sigma.shape != i.dom:
        raise WorldError("store is not over the initialisation's domain")
    u = i.inj
    contents = i.data.as_dict()
    for l, v in sigma.items():
        contents[u(l)] = v.act(u)
    return store(u.cod, contents)


def enumerate_inits(sig: Signature, inj: Injection) -> Iterator[Initialisation]:
    """Every initialisation with the given underlying injection."""
    shape = complement(inj).dom
    choices = [interp_type(sig, sig.typeof(s), inj.cod) for _, s in shape.cells]
    for vals in itertools.product(*choices):
        yield Initialisation(inj, Heaplet(shape, inj.cod, vals))


@dataclass(frozen=True, slots=True)
class Promotion:
    init: Initialisation  # h |> i : w' -> L
    push: Injection       # i <| h : w2 -> L


def promote(h: Injection, i: Initialisation) -> Promotion:
    """Transport ``i : w1 -> w2`` along ``h : w1 -> w'``.

    The result starts at ``w'`` and its data is ``i``'s data pushed into the
    local coproduct of ``h`` and the injection of ``i``.
    """
    lc = local_coproduct(h, i.inj)
    push = lc.right
    data = {push(l): v.act(push) for l, v in i.data.items()}
    return Promotion(Initialisation.make(lc.left, data), push)


# ---------------------------------------------------------------- representatives


@dataclass(frozen=True, slots=True)
class CoendRep:
    base: World
    h: Injection        # base -> priv
    payload: object     # anything with .act(h) and .locs()
    store: Heaplet      # over priv

    @property
    def priv(self) -> World:
        return self.h.cod

    def private_cells(self) -> World:
        return complement(self.h).dom

    def render(self) -> str:
        back = self.h.inverse_partial()
        pub = ", ".join(f"#{back[l]}={v}" for l, v in self.store.items() if l in back)
        prv = ", ".join(f"#{l}:{self.priv.sort_of(l)}={v}"
                        for l, v in self.store.items() if l not in back)
        return f"public: {{{pub}}} | private: {{{prv}}} | payload: {self.payload}"

    def __str__(self) -> str:
        return self.render()


def _reach(r: CoendRep) -> list[int]:
    """Cells reachable from the payload, then from the public cells, in visit order."""
    contents = r.store.as_dict()
    seen: set[int] = set()
    order: list[int] = []
    roots = list(r.payload.locs()) + [r.h(l) for l in r.base.support]
    for root in roots:
        stack = [root]
        while stack:
            l = stack.pop()
            if l in seen:
                continue
            seen.add(l)
            order.append(l)
            stack.extend(reversed(list(contents[l].locs())))
    return order


def gc_canonical(r: CoendRep) -> CoendRep:
    """Drop unreachable private cells and renumber the rest after the base."""
    public = {r.h(l): l for l in r.base.support}
    shift = numof(r.base)
    relabel = dict(public)
    cells = list(r.base.cells)
    for l in _reach(r):
        if l not in relabel:
            relabel[l] = shift + len(cells) - len(r.base)
            cells.append((relabel[l], r.priv.sort_of(l)))
    world = World(tuple(cells))
    kept = r.priv.restrict(relabel)
    m = Injection.make(kept, world, relabel)
    contents = r.store.as_dict()
    new_store = store(world, {m(l): contents[l].act(m) for l in kept.support})
    return CoendRep(r.base, inclusion(r.base, world), r.payload.act(m), new_store)


def is_canonical(r: CoendRep) -> bool:
    return gc_canonical(r) == r


def coend_equal(r1: CoendRep, r2: CoendRep) -> bool:
    if r1.base != r2.base:
        raise BaseMismatch(f"{r1.base} vs {r2.base}")
    return gc_canonical(r1) == gc_canonical(r2)


# ---------------------------------------------------------------- brute-force oracle
#
# Every initialisation factors as a renaming followed by an inclusion that
# adds cells with data, so those two kinds of step, plus undoing an
# inclusion (restricting to a closed sub-world holding every root), generate
# the same equivalence as arbitrary initialisation moves.


def _worlds_within(sig: Signature, bound: int, size: int) -> Iterator[World]:
    for locs in itertools.combinations(range(bound), size):
        for sorts in itertools.product(sig.sorts, repeat=size):
            yield World(tuple(zip(locs, sorts)))


def _move(r: CoendRep, i: Initialisation) -> CoendRep:
    return CoendRep(r.base, i.inj.after(r.h), r.payload.act(i.inj), stores_action(i, r.store))


def _neighbours(sig: Signature, r: CoendRep, bound: int) -> Iterator[CoendRep]:
    v = r.priv
    # renamings
    for target in _worlds_within(sig, bound, len(v)):
        for u in injections(v, target):
            if not u.is_identity():
                yield _move(r, renaming(u))
    # adding cells with data
    free = [l for l in range(bound) if l not in v]
    for k in range(1, len(free) + 1):
        for locs in itertools.combinations(free, k):
            for sorts in itertools.product(sig.sorts, repeat=k):
                bigger = World.of({**v.as_dict(), **dict(zip(locs, sorts))})
                for i in enumerate_inits(sig, inclusion(v, bigger)):
                    yield _move(r, i)
    # removing closed, unreachable-from-nothing-public sub-parts
    roots = set(r.payload.locs()) | set(r.h.image())
    contents = r.store.as_dict()
    optional = [l for l in v.support if l not in roots]
    for k in range(1, len(optional) + 1):
        for drop in itertools.combinations(optional, k):
            keep = v.restrict(l for l in v.support if l not in drop)
            if all(m in keep for l in keep.support for m in contents[l].locs()):
                yield CoendRep(r.base, Injection(r.base, keep, r.h.pairs), r.payload,
                               store(keep, {l: contents[l] for l in keep.support}))


def oracle_component(sig: Signature, r: CoendRep, size_bound: int,
                     budget: int = 200_000) -> set[CoendRep]:
    """All representatives connected to ``r`` through worlds within the bound."""
    if any(l >= size_bound for l in r.priv.support):
        raise BudgetExceeded(f"{r.priv} does not fit within {size_bound} locations")
    seen = {r}
    queue = deque([r])
    while queue:
        cur = queue.popleft()
        for nxt in _neighbours(sig, cur, size_bound):
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > budget:
                    raise BudgetExceeded(f"more than {budget} representatives explored")
                queue.append(nxt)
    return seen


def coend_equal_oracle(sig: Signature, r1: CoendRep, r2: CoendRep, size_bound: int,
                       budget: int = 200_000) -> bool:
    if r1.base != r2.base:
        raise BaseMismatch(f"{r1.base} vs {r2.base}")
    if r1 == r2:
        return True
    if any(l >= size_bound for l in r2.priv.support):
        raise BudgetExceeded(f"{r2.priv} does not fit within {size_bound} locations")
    return r2 in oracle_component(sig, r1, size_bound, budget)


def enumerate_reps(sig: Signature, base: World, payload_types, max_cells: int) -> Iterator[CoendRep]:
    """Every representative over ``base`` with at most ``max_cells`` cells in total
    and a payload drawn from one of ``payload_types`` (full ground types)."""
    from .worlds import enumerate_worlds
    for priv in enumerate_worlds(sig, max_cells):
        if len(priv) < len(base):
            continue
        for h in injections(base, priv):
            for ty in payload_types:
                for x in interp_type(sig, ty, priv):
                    for sigma in stores_over(sig, priv):
                        yield CoendRep(base, h, x, sigma)


__all__ = [
    "Heaplet", "Store", "store", "EMPTY_STORE", "heaplet_concat", "heaplet_contra", "heaplet_co",
    "store_lookup", "store_update", "stores_over", "Initialisation", "init_identity", "renaming",
    "compose_init", "init_from_store", "stores_action", "enumerate_inits", "Promotion", "promote",
    "CoendRep", "gc_canonical", "coend_equal", "coend_equal_oracle", "oracle_component",
    "enumerate_reps", "UnknownLocation", "BaseMismatch", "BudgetExceeded",
]
