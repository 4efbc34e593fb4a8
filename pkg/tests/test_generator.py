import collections

import pytest

from lamref.generator import GenerationExhausted, gen_of_type, gen_well_typed
from lamref.signature import CONSTANT, EXAMPLE1
from lamref.syntax import subterms
from lamref.types import BOOL, TArrow
from lamref.typing import check, infer, is_instance
from lamref.worlds import EMPTY


def test_deterministic():
    assert gen_well_typed(EXAMPLE1, 12, 7) == gen_well_typed(EXAMPLE1, 12, 7)


def test_size_must_be_positive():
    with pytest.raises(ValueError):
        gen_well_typed(EXAMPLE1, 0, 1)


def test_first_order_results():
    for seed in range(200):
        _, _, ty = gen_well_typed(EXAMPLE1, 12, seed, first_order=True)
        assert "->" not in str(ty) and not isinstance(ty, TArrow)


def test_every_constructor_appears():
    counts = collections.Counter()
    n = 0
    for sig in (EXAMPLE1, CONSTANT):
        for seed in range(500):
            _, t, _ = gen_well_typed(sig, 12, seed)
            n += 1
            counts.update({type(s).__name__ for s in subterms(t)})
    for name in ["Loc", "Var", "Inj", "Star", "Pair", "Fun", "MatchEmpty", "MatchSum",
                 "MatchProd", "App", "Assign", "Deref", "New"]:
        assert counts[name] / n >= 0.01, (name, counts)


def test_gen_of_type():
    for seed in range(50):
        t = gen_of_type(EXAMPLE1, EMPTY, BOOL, 10, seed)
        check(EXAMPLE1, EMPTY, {}, t, BOOL)


def test_well_typed_sample():
    for seed in range(300):
        layout, t, ty = gen_well_typed(CONSTANT, 12, seed)
        assert is_instance(infer(CONSTANT, layout, {}, t), ty)
