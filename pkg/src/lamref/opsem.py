"""Big-step evaluation of configurations ``<t, H>``.

Fresh locations are the smallest indices not already allocated, which
makes evaluation a function.  ``fuel`` bounds the number of rule
applications; well-typed programs always terminate well within it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .signature import Signature
from .syntax import (App, Assign, Deref, Fun, Inj, Loc, MatchEmpty, MatchProd, MatchSum, New,
                     Pair, Star, Term, Var, is_value, locations, print_term, substitute)
from .typing import TypingError, check
from .worlds import World

DEFAULT_FUEL = 10**6


class EvalError(Exception):
    pass


class Stuck(EvalError):
    def __init__(self, term: Term, reason: str):
        self.term = term
        self.reason = reason
        super().__init__(f"stuck on {print_term(term)}: {reason}")


class FuelExhausted(EvalError):
    pass


class IllTypedHeap(Exception):
    def __init__(self, loc: int | None, reason: str):
        self.loc = loc
        self.reason = reason
        where = f"#{loc}: " if loc is not None else ""
        super().__init__(f"{where}{reason}")


UntypedHeap = dict  # location index -> closed value


@dataclass(frozen=True)
class TypedHeap:
    layout: World
    contents: tuple[tuple[int, Term], ...]

    def as_dict(self) -> dict[int, Term]:
        return dict(self.contents)

    def __getitem__(self, loc: int) -> Term:
        return self.as_dict()[loc]


def to_typed(sig: Signature, w: World, h: UntypedHeap) -> TypedHeap:
    if set(h) != set(w.support):
        missing = sorted(set(w.support) ^ set(h))
        raise IllTypedHeap(missing[0], "heap support differs from the layout")
    for loc, sort in w:
        v = h[loc]
        if not is_value(v):
            raise IllTypedHeap(loc, f"{print_term(v)} is not a value")
        try:
            check(sig, w, {}, v, sig.typeof(sort))
        except TypingError as e:
            raise IllTypedHeap(loc, str(e)) from None
    return TypedHeap(w, tuple(sorted(h.items())))


def fresh_locations(w, n: int) -> list[int]:
    """The ``n`` smallest indices outside the support of ``w``."""
    taken = set(w.support) if isinstance(w, World) else set(w)
    out = []
    i = 0
    while len(out) < n:
        if i not in taken:
            out.append(i)
        i += 1
    return out


@dataclass
class Config:
    term: Term
    heap: UntypedHeap = field(default_factory=dict)


@dataclass(frozen=True)
class Result:
    value: Term
    heap: dict
    allocated: tuple[tuple[int, str], ...]  # cells created during the run, in order

    def layout(self, start: World) -> World:
        return World.of({**start.as_dict(), **dict(self.allocated)})


def eval_config(sig: Signature, c: Config, fuel: int = DEFAULT_FUEL) -> tuple[Term, UntypedHeap]:
    r = run(c.term, c.heap, fuel)
    return r.value, r.heap


def run(t: Term, heap: UntypedHeap, fuel: int = DEFAULT_FUEL) -> Result:
    ev = _Eval(dict(heap), fuel)
    v = ev.go(t)
    return Result(v, ev.heap, tuple(ev.allocated))


class _Eval:
    def __init__(self, heap: dict, fuel: int):
        self.heap = heap
        self.fuel = fuel
        self.allocated: list[tuple[int, str]] = []

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("evaluation exceeded its step budget")

    def go(self, t: Term) -> Term:
        self.tick()
        match t:
            case Loc() | Star() | Fun():
                return t
            case Var(x):
                raise Stuck(t, f"free identifier {x}")
            case Inj(i, b):
                return Inj(i, self.go(b))
            case Pair(a, b):
                va = self.go(a)
                return Pair(va, self.go(b))
            case MatchEmpty(s, _):
                v = self.go(s)
                raise Stuck(t, f"empty match on {print_term(v)}")
            case MatchSum(s, x1, a, x2, b):
                v = self.go(s)
                if not isinstance(v, Inj):
                    raise Stuck(t, f"case on non-injection {print_term(v)}")
                if v.tag == 1:
                    return self.go(substitute(a, {x1: v.body}))
                return self.go(substitute(b, {x2: v.body}))
            case MatchProd(s, x1, x2, b):
                v = self.go(s)
                if not isinstance(v, Pair):
                    raise Stuck(t, f"pair match on {print_term(v)}")
                return self.go(substitute(b, {x1: v.first, x2: v.second}))
            case App(f, a):
                fv = self.go(f)
                av = self.go(a)
                if not isinstance(fv, Fun):
                    raise Stuck(t, f"applying non-function {print_term(fv)}")
                return self.go(substitute(fv.body, {fv.param: av}))
            case Assign(r, v):
                rv = self.go(r)
                vv = self.go(v)
                if not isinstance(rv, Loc):
                    raise Stuck(t, f"assigning through non-location {print_term(rv)}")
                if rv.index not in self.heap:
                    raise Stuck(t, f"#{rv.index} is not allocated")
                self.heap[rv.index] = vv
                return Star()
            case Deref(r):
                rv = self.go(r)
                if not isinstance(rv, Loc):
                    raise Stuck(t, f"dereferencing non-location {print_term(rv)}")
                if rv.index not in self.heap:
                    raise Stuck(t, f"#{rv.index} is not allocated")
                return self.heap[rv.index]
            case New(binds, body):
                fresh = fresh_locations(self.heap.keys(), len(binds))
                env = {b.name: Loc(l) for b, l in zip(binds, fresh)}
                for b, l in zip(binds, fresh):
                    if not is_value(b.init):
                        raise Stuck(t, "initialiser is not a value")
                    self.heap[l] = substitute(b.init, env)
                    self.allocated.append((l, b.sort))
                return self.go(substitute(body, env))
        raise Stuck(t, f"not a core term ({type(t).__name__})")


eval_ = eval_config

__all__ = [
    "Stuck", "FuelExhausted", "IllTypedHeap", "TypedHeap", "Config", "Result", "to_typed",
    "fresh_locations", "substitute", "eval_config", "run", "locations",
]
