"""Types of the calculus.

Full ground types are the fragment built from ``0``, ``1``, ``+``, ``*`` and
``ref``; the full type grammar adds function types on top.
"""
from __future__ import annotations

from dataclasses import dataclass


class Type:
    __slots__ = ()

    def is_ground(self) -> bool:
        return True


@dataclass(frozen=True, slots=True)
class TEmpty(Type):
    def __str__(self) -> str:
        return "0"


@dataclass(frozen=True, slots=True)
class TUnit(Type):
    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True, slots=True)
class TRef(Type):
    sort: str

    def __str__(self) -> str:
        return f"ref {self.sort}"


@dataclass(frozen=True, slots=True)
class TSum(Type):
    left: Type
    right: Type

    def is_ground(self) -> bool:
        return self.left.is_ground() and self.right.is_ground()

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class TProd(Type):
    left: Type
    right: Type

    def is_ground(self) -> bool:
        return self.left.is_ground() and self.right.is_ground()

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class TArrow(Type):
    arg: Type
    res: Type

    def is_ground(self) -> bool:
        return False

    def __str__(self) -> str:
        return show_type(self)


BOOL = TSum(TUnit(), TUnit())

# precedence levels: arrow 0, sum 1, product 2, atoms 3
_PREC = {TArrow: 0, TSum: 1, TProd: 2}


def show_type(t: Type, prec: int = 0) -> str:
    match t:
        case TEmpty():
            return "0"
        case TUnit():
            return "1"
        case TRef(sort):
            return f"ref {sort}"
        case TArrow(a, b):
            s = f"{show_type(a, 1)} -> {show_type(b, 0)}"
        case TSum(a, b):
            s = f"{show_type(a, 2)} + {show_type(b, 1)}"
        case TProd(a, b):
            s = f"{show_type(a, 3)} * {show_type(b, 2)}"
        case Type():
            return str(t)  # metavariables of the checker
        case _:
            raise TypeError(t)
    return f"({s})" if _PREC[type(t)] < prec else s


def refs_of(t: Type) -> set[str]:
    """Sorts mentioned by ``ref`` anywhere inside ``t``."""
    match t:
        case TRef(sort):
            return {sort}
        case TSum(a, b) | TProd(a, b) | TArrow(a, b):
            return refs_of(a) | refs_of(b)
        case _:
            return set()
