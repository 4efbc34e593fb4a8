"""Storage signatures: cell sorts and the ground type each sort stores."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .lexer import ParseError, TokenStream, parse_type
from .types import BOOL, TProd, TRef, TSum, TUnit, Type, refs_of, show_type


class SignatureError(Exception):
    pass


class DuplicateSort(SignatureError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"duplicate sort {name!r}")


class UnknownSort(SignatureError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown sort {name!r}")


@dataclass(frozen=True)
class Signature:
    sorts: tuple[str, ...]
    content: tuple[Type, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", dict(zip(self.sorts, self.content)))

    def typeof(self, sort: str) -> Type:
        try:
            return self._index[sort]
        except KeyError:
            raise UnknownSort(sort) from None

    def __contains__(self, sort: str) -> bool:
        return sort in self._index

    def declarations(self) -> list[tuple[str, Type]]:
        return list(zip(self.sorts, self.content))

    def is_constant(self) -> bool:
        return is_constant_signature(self)

    def render(self) -> str:
        return "\n".join(f"cell {s} = {show_type(t)} ;" for s, t in self.declarations())


def validate_signature(decls: Iterable[tuple[str, Type]]) -> Signature:
    decls = list(decls)
    seen: set[str] = set()
    for name, _ in decls:
        if not name:
            raise SignatureError("empty sort name")
        if name in seen:
            raise DuplicateSort(name)
        seen.add(name)
    for _, ty in decls:
        if not ty.is_ground():
            raise SignatureError(f"content type {show_type(ty)} is not full ground")
        for target in sorted(refs_of(ty)):
            if target not in seen:
                raise UnknownSort(target)
    return Signature(tuple(n for n, _ in decls), tuple(t for _, t in decls))


def is_constant_signature(sig: Signature) -> bool:
    return all(not refs_of(t) for t in sig.content)


def parse_signature_decls(ts: TokenStream) -> list[tuple[str, Type]]:
    decls = []
    while ts.at("cell"):
        ts.next()
        name = ts.sort_name()
        ts.expect("=")
        ty = parse_type(ts, ground_only=True)
        ts.expect(";")
        decls.append((name, ty))
    return decls


def parse_signature(text: str) -> Signature:
    ts = TokenStream(text)
    decls = parse_signature_decls(ts)
    if ts.peek.kind != "eof":
        ts.error(f"expected 'cell' declaration, found {ts.peek.value!r}")
    return validate_signature(decls)


# Linked lists: a list cell is nil or points to a cons cell, which points to
# a payload cell and to the tail list.
EXAMPLE1 = validate_signature([
    ("data", BOOL),
    ("list", TSum(TUnit(), TRef("cell"))),
    ("cell", TProd(TRef("data"), TRef("list"))),
])

CONSTANT = validate_signature([("d", BOOL)])

__all__ = [
    "Signature", "SignatureError", "DuplicateSort", "UnknownSort", "ParseError",
    "validate_signature", "is_constant_signature", "parse_signature", "EXAMPLE1", "CONSTANT",
]
