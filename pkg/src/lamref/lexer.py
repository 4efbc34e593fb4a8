"""Tokenizer and type parser shared by the signature and program readers."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .types import BOOL, TArrow, TEmpty, TProd, TRef, TSum, TUnit, Type


class ParseError(Exception):
    def __init__(self, position: int, message: str, text: str = ""):
        self.position = position
        self.message = message
        line, col = _line_col(text, position) if text else (0, position)
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}" if text else f"at {position}: {message}")


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # 'id', 'int', 'loc', 'sym', 'eof'
    value: str
    pos: int


KEYWORDS = {
    "fun", "match", "with", "inj1", "inj2", "new", "in", "let", "ref",
    "cell", "layout", "bool", "true", "false", "if", "then", "else",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*|\(\*(?:.|\n)*?\*\))
  | (?P<loc>\#\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>->|:=|\(\)|[{}()\[\],;:=!|+*<>.])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(pos, f"unexpected character {text[pos]!r}", text)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", pos))
    return out


class TokenStream:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def peek_at(self, k: int) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek
        return tok.value == value and tok.kind in ("sym", "id")

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.next()
            return True
        return False

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.error(f"expected {value!r}, found {self.peek.value or 'end of input'!r}")
        return self.next()

    def ident(self) -> str:
        tok = self.peek
        if tok.kind != "id" or tok.value in KEYWORDS:
            self.error(f"expected identifier, found {tok.value or 'end of input'!r}")
        return self.next().value

    def sort_name(self) -> str:
        """Sort names live in their own namespace, so keywords are allowed."""
        tok = self.peek
        if tok.kind != "id":
            self.error(f"expected a sort name, found {tok.value or 'end of input'!r}")
        return self.next().value

    def error(self, message: str, pos: int | None = None):
        raise ParseError(self.peek.pos if pos is None else pos, message, self.text)


def parse_type(ts: TokenStream, ground_only: bool = False) -> Type:
    """``->`` is loosest, then ``+``, then ``*``; all right-associative."""
    left = _parse_sum(ts, ground_only)
    if not ground_only and ts.accept("->"):
        return TArrow(left, parse_type(ts))
    return left


def _parse_sum(ts: TokenStream, ground_only: bool) -> Type:
    left = _parse_prod(ts, ground_only)
    if ts.accept("+"):
        return TSum(left, _parse_sum(ts, ground_only))
    return left


def _parse_prod(ts: TokenStream, ground_only: bool) -> Type:
    left = _parse_atom(ts, ground_only)
    if ts.accept("*"):
        return TProd(left, _parse_prod(ts, ground_only))
    return left


def _parse_atom(ts: TokenStream, ground_only: bool) -> Type:
    tok = ts.peek
    if tok.kind == "int" and tok.value in ("0", "1"):
        ts.next()
        return TEmpty() if tok.value == "0" else TUnit()
    if ts.accept("bool"):
        return BOOL
    if ts.accept("ref"):
        return TRef(ts.sort_name())
    if ts.accept("("):
        t = parse_type(ts, ground_only)
        ts.expect(")")
        return t
    ts.error(f"expected a type, found {tok.value or 'end of input'!r}")
