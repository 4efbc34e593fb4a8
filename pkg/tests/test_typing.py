import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamref.generator import gen_well_typed
from lamref.signature import CONSTANT, EXAMPLE1
from lamref.syntax import parse_term
from lamref.types import BOOL, TArrow, TRef, TSum, TUnit
from lamref.typing import (TMeta, TypingError, check, ground, has_meta, infer, is_instance,
                           layout_extends, typeable_at)
from lamref.worlds import EMPTY, World

D01 = World.of({0: "data", 1: "data"})


def ty_of(text, sig=EXAMPLE1, layout=EMPTY):
    return infer(sig, layout, {}, parse_term(text, sig, layout))


def test_deref_has_content_type():
    assert ty_of("!#0", CONSTANT, World.of({0: "d"})) == BOOL


def test_identity_function():
    assert ty_of("fun (x:1) -> x") == TArrow(TUnit(), TUnit())


def test_swap_program_has_unit_type():
    assert ty_of("let x = !#0 in #0 := !#1; #1 := x", layout=D01) == TUnit()


def test_cyclic_list_type():
    t = "new {p:data = true, l:list = inj2 c, c:cell = (p, l)} in l"
    assert ty_of(t) == TRef("list")


def test_principal_type_of_injection():
    ty = ty_of("inj1 ()")
    assert isinstance(ty, TSum) and ty.left == TUnit() and isinstance(ty.right, TMeta)
    assert is_instance(ty, BOOL) and is_instance(ty, TSum(TUnit(), TRef("data")))
    assert ground(EXAMPLE1, ty) == BOOL


def test_injection_variable_used_as_reference():
    t = parse_term("match inj2 #0 with inj1 a -> () | inj2 b -> b := true", EXAMPLE1,
                   World.of({0: "data"}))
    assert infer(EXAMPLE1, World.of({0: "data"}), {}, t) == TUnit()


@pytest.mark.parametrize("text", [
    "!()", "#0", "() ()", "fun (x:1) -> x x", "#0 := ()", "match () with {} : 1",
])
def test_ill_typed(text):
    layout = World.of({0: "data"}) if text != "#0" else EMPTY
    with pytest.raises(TypingError):
        infer(EXAMPLE1, layout, {}, parse_term(text, None, None))


def test_new_initialiser_checked_against_sort():
    with pytest.raises(TypingError):
        ty_of("new {x:list = ((), ())} in x")


def test_layout_extends():
    assert layout_extends(EMPTY, World.of({0: "d"}))
    assert layout_extends(World.of({0: "d"}), World.of({0: "d", 1: "c"}))
    assert not layout_extends(World.of({0: "d"}), World.of({0: "c", 1: "d"}))


def test_check_against_instance():
    t = parse_term("inj2 ()")
    check(EXAMPLE1, EMPTY, {}, t, BOOL)
    assert not typeable_at(EXAMPLE1, EMPTY, {}, t, TSum(TUnit(), TRef("data")))


@given(st.integers(0, 10**6), st.sampled_from([EXAMPLE1, CONSTANT]))
def test_generated_terms_type_at_their_type(seed, sig):
    layout, t, ty = gen_well_typed(sig, 12, seed)
    found = infer(sig, layout, {}, t)
    assert is_instance(found, ty)
    check(sig, layout, {}, t, ty)


@given(st.integers(0, 10**6), st.sampled_from([EXAMPLE1, CONSTANT]), st.data())
def test_monotone_in_layout(seed, sig, data):
    layout, t, ty = gen_well_typed(sig, 10, seed)
    n = max(layout.support, default=-1) + 1
    extra = data.draw(st.lists(st.sampled_from(sig.sorts), max_size=2))
    bigger = World.of({**layout.as_dict(), **{n + i: s for i, s in enumerate(extra)}})
    assert infer(sig, bigger, {}, t) == infer(sig, layout, {}, t)


def test_ground_fills_metas():
    ty = ty_of("fun (x:1) -> inj2 ()")
    assert has_meta(ty) and not has_meta(ground(EXAMPLE1, ty))
