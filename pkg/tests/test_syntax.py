import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamref.generator import gen_well_typed
from lamref.lexer import ParseError
from lamref.signature import CONSTANT, EXAMPLE1
from lamref.syntax import (App, Deref, Fun, Inj, Let, Loc, New, Pair, Star, Var, alpha_eq, desugar,
                           free_vars, is_value, parse_heap, parse_program, parse_surface_program,
                           parse_term, parse_world, print_term, substitute)
from lamref.types import TUnit
from lamref.worlds import World

CYCLIC = """
cell data = 1 + 1 ;
cell list = 1 + ref cell ;
cell cell = ref data * ref list ;
new {payload : data = true,
     cyclic_list : list = inj2 head,
     head : cell = (payload, cyclic_list)}
in cyclic_list
"""


def test_parse_deref_program():
    sig, layout, t = parse_program("cell d = bool; layout {#0:d,#1:d} !#0")
    assert sig == CONSTANT
    assert layout == World.of({0: "d", 1: "d"})
    assert t == Deref(Loc(0))


def test_parse_cyclic_list():
    sig, layout, t = parse_program(CYCLIC)
    assert isinstance(t, New) and [b.name for b in t.binds] == ["payload", "cyclic_list", "head"]
    assert t.body == Var("cyclic_list")
    assert free_vars(t.binds[2].init) == {"payload", "cyclic_list"}


def test_let_is_application():
    t = parse_term("let x : 1 = () in x")
    assert t == App(Fun("x", TUnit(), Var("x")), Star())


def test_unannotated_let_takes_inferred_type():
    t = parse_term("let x = () in x", EXAMPLE1)
    assert t == App(Fun("x", TUnit(), Var("x")), Star())


def test_ref_sugar():
    t = parse_term("ref d true", CONSTANT)
    assert isinstance(t, App) and isinstance(t.fn.body, New)
    assert t.fn.body.binds[0].sort == "d"


def test_tuples_nest_right():
    assert parse_term("((), (), ())") == Pair(Star(), Pair(Star(), Star()))


def test_desugar_idempotent():
    t = parse_term("let x = !#0 in #0 := !#1; #1 := x", EXAMPLE1,
                   World.of({0: "data", 1: "data"}))
    assert desugar(t) == t


def test_surface_let_kept_without_desugaring():
    assert isinstance(parse_term("let x = () in x", core=False), Let)


def test_new_initialisers_must_be_values():
    with pytest.raises(ParseError):
        parse_term("new {x:d = !#0} in x", CONSTANT, World.of({0: "d"}))


def test_alpha_eq():
    assert alpha_eq(parse_term("fun (x:1) -> x"), parse_term("fun (y:1) -> y"))
    assert not alpha_eq(parse_term("fun (x:1) -> x"), parse_term("fun (x:1) -> ()"))
    assert alpha_eq(parse_term("new {a:d = true} in a"), parse_term("new {b:d = true} in b"))


def test_print():
    assert print_term(Star()) == "()"
    assert print_term(Deref(Loc(0))) == "!#0"


def test_substitute():
    assert substitute(Var("x"), {"x": Star()}) == Star()
    t = parse_term("fun (x:1) -> y", core=False)
    assert substitute(t, {"y": Inj(1, Star())}) == Fun("x", TUnit(), Inj(1, Star()))


def test_substitution_avoids_capture():
    t = Fun("x", TUnit(), Var("y"))
    out = substitute(t, {"y": Var("x")})
    assert out.param != "x" and out.body == Var("x")


def test_values():
    assert is_value(parse_term("(inj1 #0, fun (x:1) -> !#0)"))
    assert not is_value(parse_term("!#0"))


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_term("fun (x:1) ->\n  (x,")
    assert e.value.line == 2


def test_positions_recorded():
    p = parse_surface_program("cell d = bool;\nlayout {#0:d}\n#0 := (!#0,\n ())")
    pair = p.term.value
    assert p.where(pair) == (3, 7)


def test_parse_world_and_heap():
    w = parse_world("{#0:data, #2:list}")
    assert w == World.of({0: "data", 2: "list"})
    h = parse_heap("{#0 = true, #2 = inj2 #5}", EXAMPLE1, w)
    assert h[2] == Inj(2, Loc(5))
    with pytest.raises(ParseError):
        parse_heap("{#0 = !#0}")


@given(st.integers(0, 10**6), st.sampled_from([EXAMPLE1, CONSTANT]))
def test_print_parse_round_trip(seed, sig):
    layout, t, _ = gen_well_typed(sig, 12, seed)
    assert alpha_eq(parse_term(print_term(t)), t)


def test_print_parse_round_trip_corpus():
    for seed in range(500):
        for sig in (EXAMPLE1, CONSTANT):
            _, t, _ = gen_well_typed(sig, 12, seed)
            assert alpha_eq(parse_term(print_term(t)), t), print_term(t)
