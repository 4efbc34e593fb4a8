import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamref.generator import gen_well_typed
from lamref.harness import heaps_over
from lamref.opsem import (Config, FuelExhausted, IllTypedHeap, Stuck, TypedHeap, eval_config,
                          fresh_locations, run, to_typed)
from lamref.signature import CONSTANT, EXAMPLE1
from lamref.syntax import FALSE, TRUE, Inj, Loc, Pair, Star, parse_term
from lamref.typing import check
from lamref.worlds import EMPTY, World

D = World.of({0: "d"})


def test_to_typed():
    assert isinstance(to_typed(CONSTANT, D, {0: Inj(1, Star())}), TypedHeap)
    with pytest.raises(IllTypedHeap):
        to_typed(CONSTANT, D, {})
    with pytest.raises(IllTypedHeap):
        to_typed(EXAMPLE1, World.of({0: "list"}), {0: Inj(2, Loc(1))})


def test_fresh_locations():
    assert fresh_locations(World.of({0: "d", 2: "d"}), 2) == [1, 3]
    assert fresh_locations(EMPTY, 1) == [0]
    assert fresh_locations(D, 1) == [1]


def test_new_then_deref():
    t = parse_term("new {x:d = inj1 ()} in !x", CONSTANT)
    v, h = eval_config(CONSTANT, Config(t, {}))
    assert v == Inj(1, Star()) and h == {0: Inj(1, Star())}


def test_swap():
    w = World.of({0: "data", 1: "data"})
    t = parse_term("let x = !#0 in #0 := !#1; #1 := x", EXAMPLE1, w)
    r = run(t, {0: TRUE, 1: FALSE})
    assert r.value == Star() and r.heap == {0: FALSE, 1: TRUE}


def test_values_evaluate_to_themselves():
    v = parse_term("(inj2 #0, fun (x:1) -> !#0)")
    assert run(v, {0: TRUE}).value == v


def test_cyclic_list_heap():
    t = parse_term("new {p:data = true, l:list = inj2 c, c:cell = (p, l)} in l", EXAMPLE1)
    r = run(t, {})
    assert r.value == Loc(1)
    assert r.heap == {0: TRUE, 1: Inj(2, Loc(2)), 2: Pair(Loc(0), Loc(1))}
    assert r.allocated == ((0, "data"), (1, "list"), (2, "cell"))
    to_typed(EXAMPLE1, r.layout(EMPTY), r.heap)


def test_allocation_avoids_existing_cells():
    t = parse_term("ref d false", CONSTANT, World.of({1: "d"}))
    r = run(t, {1: TRUE})
    assert r.value == Loc(0) and r.heap == {0: FALSE, 1: TRUE}


def test_stuck_on_dangling_location():
    with pytest.raises(Stuck):
        run(parse_term("!#3"), {})


def test_fuel():
    t = parse_term("(fun (x:1) -> x) ((fun (x:1) -> x) ())")
    with pytest.raises(FuelExhausted):
        run(t, {}, fuel=1)


def _preserved(sig, seed):
    layout, t, ty = gen_well_typed(sig, 12, seed)
    heaps = list(heaps_over(sig, layout))
    heap = random.Random(seed).choice(heaps)
    r = run(t, heap)
    w2 = r.layout(layout)
    assert w2.as_dict().items() >= layout.as_dict().items()
    check(sig, w2, {}, r.value, ty)
    to_typed(sig, w2, r.heap)


@given(st.integers(0, 10**6), st.sampled_from([EXAMPLE1, CONSTANT]))
def test_preservation_and_totality(seed, sig):
    _preserved(sig, seed)
