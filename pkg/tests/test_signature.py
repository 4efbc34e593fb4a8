import pytest

from lamref.lexer import ParseError
from lamref.signature import (CONSTANT, EXAMPLE1, DuplicateSort, SignatureError, UnknownSort,
                              is_constant_signature, parse_signature, validate_signature)
from lamref.types import BOOL, TArrow, TProd, TRef, TSum, TUnit


def test_example1_has_three_sorts():
    sig = validate_signature([("data", BOOL), ("list", TSum(TUnit(), TRef("cell"))),
                              ("cell", TProd(TRef("data"), TRef("list")))])
    assert sig.sorts == ("data", "list", "cell")
    assert sig == EXAMPLE1


def test_empty_signature():
    assert validate_signature([]).sorts == ()


def test_unresolved_reference():
    with pytest.raises(UnknownSort):
        validate_signature([("a", TRef("b"))])


def test_duplicate_sort():
    with pytest.raises(DuplicateSort):
        validate_signature([("a", TUnit()), ("a", BOOL)])


def test_functions_are_not_storable():
    with pytest.raises(SignatureError):
        validate_signature([("f", TArrow(TUnit(), TUnit()))])


def test_cyclic_sorts_are_legal():
    # list and cell refer to each other
    assert "list" in EXAMPLE1 and "cell" in EXAMPLE1
    assert EXAMPLE1.typeof("list") == TSum(TUnit(), TRef("cell"))


def test_constant_signature():
    assert is_constant_signature(CONSTANT)
    assert not is_constant_signature(EXAMPLE1)


def test_parse_round_trip():
    assert parse_signature(EXAMPLE1.render()) == EXAMPLE1


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_signature("cell d = 1 + ;")
    assert e.value.line == 1


def test_unknown_sort_lookup():
    with pytest.raises(UnknownSort):
        EXAMPLE1.typeof("nope")
