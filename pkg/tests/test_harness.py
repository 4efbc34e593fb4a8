import json

from lamref.denote import EQUAL
from lamref.harness import (EQUATIONS, GS6, NEGATIVE_CONTROL, EquationSchema, TestReport,
                            check_constant_at_zero, check_equation, check_masking, check_negative,
                            check_soundness, compare_open, instantiate, obs_diff,
                            soundness_suite, value_to_term)
from lamref.signature import CONSTANT, EXAMPLE1
from lamref.syntax import Loc, parse_term
from lamref.types import BOOL, TUnit
from lamref.worlds import EMPTY, VLoc, World

D01 = World.of({0: "data", 1: "data"})
SWAP = "let x = !#0 in #0 := !#1; #1 := x"
CYCLIC = "new {p:data = true, l:list = inj2 c, c:cell = (p, l)} in l"


def test_report_json():
    r = TestReport("x", tried=2)
    r.fail(a=1)
    d = json.loads(r.to_json())
    assert d["ok"] is False and d["failures"] == [{"a": "1"}]
    assert "[FAIL] x" in r.render()


def test_soundness_examples():
    for w, text in ((D01, SWAP), (EMPTY, CYCLIC)):
        t = parse_term(text, EXAMPLE1, w)
        from lamref.typing import infer
        rep = check_soundness(EXAMPLE1, w, t, infer(EXAMPLE1, w, {}, t), 2)
        assert rep.tried > 0 and rep.ok, rep.render()


def test_soundness_generated_sample():
    rep = soundness_suite([EXAMPLE1, CONSTANT], 40)
    assert rep.ok, rep.render()


def test_soundness_higher_order_sample():
    rep = soundness_suite([CONSTANT], 40, first_order=False)
    assert rep.ok, rep.render()


def test_equations():
    for e in EQUATIONS:
        rep = check_equation(e, CONSTANT, 3)
        assert rep.ok, rep.render()


def test_lookup_update_law():
    e = next(e for e in EQUATIONS if e.name == "lookup-update")
    assert check_equation(e, EXAMPLE1, 3).ok


def test_negative_control():
    refuted, witnesses = check_negative(NEGATIVE_CONTROL, EXAMPLE1, 3)
    assert refuted and "not-equal" in witnesses[0]


def test_wrong_schema_reported():
    wrong = EquationSchema("wrong", ("{k1}",), (), "#0 := true", "()")
    assert not check_equation(wrong, CONSTANT, 2).ok


def test_untypable_schema_reported():
    bad = EquationSchema("bad", (), (), "()", "true")
    assert not check_equation(bad, CONSTANT, 2).ok


def test_masking():
    assert check_masking(CONSTANT, parse_term("let x = ref d true in true", CONSTANT)).ok
    assert check_masking(CONSTANT, parse_term("true")).ok
    t = parse_term(f"let l = {CYCLIC} in match !l with inj1 u -> false "
                   "| inj2 c -> match !c with (p, q) -> !p", EXAMPLE1)
    rep = check_masking(EXAMPLE1, t)
    assert rep.ok and "pure inj1 ()" in rep.notes[0]


def test_masking_rejects_reference_types():
    assert not check_masking(CONSTANT, parse_term("ref d true", CONSTANT)).ok


def test_constant_at_zero():
    assert check_constant_at_zero(CONSTANT, 30).ok
    assert check_constant_at_zero(EXAMPLE1, 20, seed=100).ok


def test_obs_diff_counter_example():
    t1, t2 = parse_term(SWAP, EXAMPLE1, D01), parse_term("()")
    ctx, heap, v1, v2 = obs_diff(EXAMPLE1, D01, t1, t2, TUnit())
    assert "!#0" in ctx and v1 != v2


def test_obs_diff_self_and_gs6():
    t = parse_term(SWAP, EXAMPLE1, D01)
    assert obs_diff(EXAMPLE1, D01, t, t, TUnit()) is None
    w = World.of({0: "data", 1: "data"})
    a = parse_term("#0 := true; #1 := false", EXAMPLE1, w)
    b = parse_term("#1 := false; #0 := true", EXAMPLE1, w)
    assert obs_diff(EXAMPLE1, w, a, b, TUnit()) is None


def test_value_to_term():
    assert value_to_term(VLoc(3)) == Loc(3)
