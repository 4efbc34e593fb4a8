"""Acceptance suite: one test per criterion, each printing a single
``[PASS]``/``[FAIL]`` line.  All sizes, bounds, seeds and time limits are
pinned below.  Also runnable directly: ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import functools
import itertools
import random
import sys
import time
from pathlib import Path

import pytest

from lamref.cli import load
from lamref.denote import NOT_EQUAL, compare_bounded, denote
from lamref.generator import gen_well_typed
from lamref.harness import (EQUATIONS, GS6, NEGATIVE_CONTROL, check_constant_at_zero,
                            check_equation, check_masking, check_negative, heaps_over, obs_diff,
                            soundness_suite)
from lamref.initialisations import (EMPTY_STORE, coend_equal, enumerate_reps, gc_canonical,
                                    oracle_component)
from lamref.laws import (check_dstrength_order, check_end_condition, check_invertible_unit,
                         check_p_laws, check_strength_laws, check_t_laws)
from lamref.opsem import EvalError, IllTypedHeap, run, to_typed
from lamref.signature import CONSTANT, EXAMPLE1
from lamref.syntax import Inj, Loc, Pair, locations, parse_term, print_term
from lamref.types import BOOL, TArrow, TRef, TUnit
from lamref.typing import TypingError, check, infer, is_instance
from lamref.worlds import World, enumerate_worlds

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"
SIGS = (EXAMPLE1, CONSTANT)

# pinned parameters
CORPUS_SEEDS = 5000          # per signature, so 10,000 terms
CORPUS_MAX_SIZE = 12         # sizes cycle through 1..12
EXTENSIONS_PER_TERM = 3
EXTENSION_MAX_CELLS = 2      # cells added by a random extension
TYPING_TIME_LIMIT = 60.0     # seconds
SOUNDNESS_PROGRAMS = 500     # per signature, so 1,000 programs
SOUNDNESS_BOUND = 2          # worlds of at most this many cells
SOUNDNESS_TIME_LIMIT = 600.0
ORACLE_CELLS = 3
LAW_BOUND = 2
UNIT_BOUND = 3
CONSTANT_PROGRAMS = 100
GS_BOUND = 3
EQ_BOUND = 2


_capsys = None


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def report(n: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    if _capsys is None:
        print(line, flush=True)
        return
    with _capsys.disabled():
        print("\n" + line, flush=True)


# ---------------------------------------------------------------- corpus


@functools.lru_cache(maxsize=None)
def corpus() -> tuple:
    out = []
    for sig in SIGS:
        for seed in range(CORPUS_SEEDS):
            size = 1 + seed % CORPUS_MAX_SIZE
            layout, t, ty = gen_well_typed(sig, size, seed)
            out.append((sig, seed, layout, t, ty))
    return tuple(out)


def random_extension(sig, layout: World, rng: random.Random) -> World:
    """``layout`` plus 1..EXTENSION_MAX_CELLS cells at random fresh indices."""
    d = layout.as_dict()
    free = [i for i in range(len(layout) + 2 * EXTENSION_MAX_CELLS) if i not in d]
    for i in rng.sample(free, rng.randint(1, EXTENSION_MAX_CELLS)):
        d[i] = rng.choice(sig.sorts)
    return World.of(d)


def same_principal(a, b) -> bool:
    return is_instance(a, b) and is_instance(b, a)


def test_criterion_1_typing_uniqueness_monotonicity():
    start = time.perf_counter()
    terms = corpus()
    failures = []
    for sig, seed, layout, t, ty in terms:
        try:
            principal = infer(sig, layout, {}, t)
            if not is_instance(principal, ty) or not same_principal(principal, infer(sig, layout, {}, t)):
                failures.append((seed, "generated type is not an instance of the principal type"))
                continue
            rng = random.Random(seed)
            for _ in range(EXTENSIONS_PER_TERM):
                w2 = random_extension(sig, layout, rng)
                if not same_principal(principal, infer(sig, w2, {}, t)):
                    failures.append((seed, f"type changes at {w2}"))
                check(sig, w2, {}, t, ty)
        except TypingError as e:
            failures.append((seed, str(e)))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < TYPING_TIME_LIMIT
    report(1, ok, f"{len(terms)} terms typed, {EXTENSIONS_PER_TERM} extensions each, "
           f"{len(failures)} failures, {elapsed:.1f}s (limit {TYPING_TIME_LIMIT:.0f}s)")
    assert not failures, failures[:5]
    assert elapsed < TYPING_TIME_LIMIT


def some_heap(sig, layout: World, seed: int) -> dict:
    heaps = list(itertools.islice(heaps_over(sig, layout), 64))
    return random.Random(seed).choice(heaps)


def test_criterion_2_preservation_totality():
    failures = []
    terms = corpus()
    for sig, seed, layout, t, ty in terms:
        heap = some_heap(sig, layout, seed)
        try:
            res = run(t, heap)
            final = res.layout(layout)
            assert layout.extends(final)
            check(sig, final, {}, res.value, ty)
            to_typed(sig, final, res.heap)
        except (EvalError, TypingError, IllTypedHeap, AssertionError) as e:
            failures.append((seed, type(e).__name__, str(e)))
    report(2, not failures, f"{len(terms)} runs, {len(failures)} stuck/ill-typed results")
    assert not failures, failures[:5]


def test_criterion_3_soundness():
    start = time.perf_counter()
    rep = soundness_suite(SIGS, SOUNDNESS_PROGRAMS, seed=0, size=CORPUS_MAX_SIZE,
                          bound=SOUNDNESS_BOUND)
    elapsed = time.perf_counter() - start
    ok = rep.ok and rep.undecided == 0 and elapsed < SOUNDNESS_TIME_LIMIT
    report(3, ok, f"{SOUNDNESS_PROGRAMS * len(SIGS)} programs, {rep.tried} (world, store) instances, "
           f"{len(rep.failures)} failures, {rep.undecided} undecided, {elapsed:.1f}s "
           f"(limit {SOUNDNESS_TIME_LIMIT:.0f}s)")
    assert rep.ok, rep.render()
    assert rep.undecided == 0, rep.render()
    assert elapsed < SOUNDNESS_TIME_LIMIT


def payload_types(sig):
    return [TUnit(), BOOL] + [TRef(s) for s in sig.sorts]


def test_criterion_4_oracle_agreement():
    # every ordered pair of representatives over the same base and payload
    # type, so both directions are covered
    start = time.perf_counter()
    pairs = disagree = reps_total = 0
    for sig in SIGS:
        for base in enumerate_worlds(sig, ORACLE_CELLS):
            for ty in payload_types(sig):
                reps = list(enumerate_reps(sig, base, [ty], ORACLE_CELLS))
                reps_total += len(reps)
                for r1 in reps:
                    comp = oracle_component(sig, r1, ORACLE_CELLS)
                    for r2 in reps:
                        pairs += 1
                        disagree += coend_equal(r1, r2) != (r2 in comp)
    elapsed = time.perf_counter() - start
    report(4, disagree == 0, f"{reps_total} representatives, {pairs} ordered pairs, "
           f"{disagree} disagreements, {elapsed:.1f}s")
    assert disagree == 0


def test_criterion_5_monad_and_strength_laws():
    reps = []
    for sig in SIGS:
        for fn in (check_p_laws, check_t_laws, check_strength_laws, check_dstrength_order,
                   check_end_condition):
            reps.append(fn(sig, LAW_BOUND))
    failed = [r for r in reps if not r.ok]
    report(5, not failed, f"{sum(r.tried for r in reps)} checks at worlds <= {LAW_BOUND} cells, "
           f"{sum(len(r.failures) for r in reps)} failures")
    assert not failed, "\n".join(r.render() for r in failed)


def test_criterion_6_invertible_unit_and_masking():
    unit = check_invertible_unit(CONSTANT, UNIT_BOUND)
    const = check_constant_at_zero(CONSTANT, CONSTANT_PROGRAMS)
    t = parse_term("let x = ref d true in true", CONSTANT)
    masked = check_masking(CONSTANT, t)
    ok = unit.ok and const.ok and masked.ok
    report(6, ok, f"unit bijective on {unit.tried} worlds <= {UNIT_BOUND} cells; "
           f"{const.tried} boolean programs constant at the empty world; "
           f"masking {'holds' if masked.ok else 'fails'} for {print_term(t)}")
    assert ok, "\n".join(r.render() for r in (unit, const, masked))


def test_criterion_7_gs_suite():
    gs6 = check_equation(GS6, EXAMPLE1, GS_BOUND)
    companions = [check_equation(e, EXAMPLE1, GS_BOUND) for e in EQUATIONS if e is not GS6]
    refuted, witnesses = check_negative(NEGATIVE_CONTROL, EXAMPLE1, GS_BOUND)
    bad = [r for r in [gs6, *companions] if not r.ok]
    ok = not bad and refuted and all(witnesses)
    report(7, ok, f"GS6 {gs6.tried} instances at bound {GS_BOUND}; {len(companions)} companion "
           f"schemas, {len(bad)} failing; negative control "
           f"{'refuted with ' + str(len(witnesses)) + ' witness(es)' if refuted else 'NOT refuted'}")
    assert not bad, "\n".join(r.render() for r in bad)
    assert refuted and witnesses


def test_criterion_8_swap_is_not_unit():
    sig, layout, swap, ty = load(str(PROGRAMS / "swap.lr"))
    unit = parse_term("()", sig, layout)
    v = compare_bounded(sig, denote(sig, layout, swap), denote(sig, layout, unit), ty, EQ_BOUND)
    found = obs_diff(sig, layout, swap, unit, ty)
    ok = v.status == NOT_EQUAL and v.witness is not None and found is not None and "!#0" in found[0]
    h, s = (v.witness[0], v.witness[1]) if v.witness else (None, None)
    report(8, ok, f"swap vs () {v.status} with witness h={h}, store={s}; "
           f"context {found[0] if found else None!r}")
    assert ok


def test_criterion_9_higher_type_separation():
    sig, layout, f1, _ = load(str(PROGRAMS / "const_fun.lr"))
    _, _, f2, _ = load(str(PROGRAMS / "hidden_fun.lr"))
    ty = TArrow(TUnit(), BOOL)
    v = compare_bounded(sig, denote(sig, layout, f1), denote(sig, layout, f2), ty, EQ_BOUND)
    report(9, v.status == NOT_EQUAL, f"fun _ -> true vs let x = new true in fun _ -> !x: {v.status}")
    assert v.status == NOT_EQUAL, v.render()


def test_criterion_10_cyclic_allocation(tmp_path):
    sig, layout, t, _ = load(str(PROGRAMS / "cyclic_list.lr"))
    res = run(t, {})
    expected = {0: parse_term("true"), 1: Inj(2, Loc(2)), 2: Pair(Loc(0), Loc(1))}
    graph = {l: locations(v) for l, v in res.heap.items()}
    cycle = 2 in graph[1] and 1 in graph[2]
    c = gc_canonical(denote(sig, layout, t).at(EMPTY_STORE))
    # the same program with an extra unreachable cell
    junk_text = (PROGRAMS / "cyclic_list.lr").read_text().replace(
        "new {", "new {junk : data = false,\n     ")
    junk = tmp_path / "cyclic_junk.lr"
    junk.write_text(junk_text)
    sig2, layout2, t2, _ = load(str(junk))
    c2 = gc_canonical(denote(sig2, layout2, t2).at(EMPTY_STORE))
    ok = (res.value == Loc(1) and res.heap == expected
          and res.allocated == ((0, "data"), (1, "list"), (2, "cell")) and cycle
          and len(c.priv) == 3 and len(c2.priv) == 3 and coend_equal(c, c2))
    report(10, ok, f"value {print_term(res.value)}, heap "
           f"{{{', '.join(f'#{l} = {print_term(v)}' for l, v in sorted(res.heap.items()))}}}, "
           f"cycle #1 -> #2 -> #1 {'present' if cycle else 'missing'}, "
           f"gc keeps {len(c.priv)} cells ({len(c2.priv)} with an unreachable extra)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
