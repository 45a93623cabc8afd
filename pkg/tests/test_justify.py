import random

from hypothesis import given, settings, strategies as st

from esmem.es import bits
from esmem.justify import (
    LRUMemo, acext, acext_step, config_justifies, event_justifies, is_justified, justifier_masks, saturated_reachable,
)
from esmem.randprog import ProgramShape, random_program
from esmem.semantics import compile_program, program_semantics

from conftest import figure, ids
from oracles import acext_relation, all_configurations

IF_Y = "if(y){x=0;} else {x=1; x=x;}"


def by_label(es, text, nth=0):
    return [e for e in range(es.n) if str(es.labels[e]) == text][nth]


def test_if_y_example():
    es = compile_program(IF_Y)
    init = es.ev("init")
    rx0, rx1 = by_label(es, "R x 0"), by_label(es, "R x 1")
    ry0, ry1 = by_label(es, "R y 0"), by_label(es, "R y 1")
    assert not event_justifies(es, init, rx0)
    assert event_justifies(es, init, ry0)
    assert event_justifies(es, by_label(es, "W x 1"), rx1)
    # no write of y=1, and neither write of x=0 justifies the read of 0
    assert justifier_masks(es)[ry1] == 0
    assert justifier_masks(es)[rx0] == 0


def test_p1_event_level():
    f = figure("P1")
    assert event_justifies(f, "16", "14")
    assert not event_justifies(f, "16", "13")
    assert event_justifies(f, "10", "11") and event_justifies(f, "10", "13")


def test_config_justifies_examples():
    f = figure("P1")
    assert config_justifies(f, f.mask(["10"]), f.mask(["10", "11", "13"]))
    assert not config_justifies(f, f.mask(["10"]), f.mask(["10", "12"]))
    for c in all_configurations(f):
        assert config_justifies(f, c, c)


def test_is_justified_examples():
    es = compile_program("y=x;")
    verdicts = sorted(
        (str(es.labels[next(e for e in bits(c) if es.labels[e].kind == "R")]), is_justified(es, c))
        for c in es.maximal_configurations()
    )
    assert verdicts == [("R x 0", True), ("R x 1", False)]
    f = figure("P1")
    assert is_justified(f, f.mask(["10"]))
    assert is_justified(f, f.mask(["10", "12", "14", "16", "18"]))


def test_acext_step_examples():
    p4 = figure("P4")
    assert p4.ev("47") in bits(acext_step(p4, p4.mask(["40"])))
    f = figure("P1")
    assert f.ev("12") not in bits(acext_step(f, f.mask(["10", "17"])))
    assert f.ev("11") in bits(acext_step(f, f.mask(["10"])))
    for m in f.maximal_configurations():
        if is_justified(f, m):
            assert acext_step(f, m) == 0


def test_acext_examples():
    p4 = figure("P4")
    assert acext(p4, 0, p4.mask(["40", "47", "42", "46", "44"]))
    f = figure("P1")
    assert not acext(f, 0, f.mask(["10", "12", "14", "16", "18"]))
    c = f.mask(["10", "11"])
    assert acext(f, c, c)


def test_saturated_reachable_examples():
    p3 = figure("P3")
    got = {frozenset(ids(p3, m)) for m in saturated_reachable(p3, 0)}
    assert got == {frozenset({"30", "31", "33", "35", "37"}), frozenset({"30", "31", "34", "35", "38"})}
    f = figure("P1")
    assert {frozenset(ids(f, m)) for m in saturated_reachable(f, 0)} == {frozenset({"10", "11", "13", "15", "17"})}
    (m,) = saturated_reachable(f, 0)
    assert saturated_reachable(f, m) == {m}


def test_lru_memo_evicts_oldest():
    memo = LRUMemo(2)
    memo.put(1, "a")
    memo.put(2, "b")
    memo.get(1)
    memo.put(3, "c")
    assert memo.get(2) is None and memo.get(1) == "a" and len(memo) == 2


def small_program_es(seed, **kw):
    p = random_program(random.Random(seed), ProgramShape(**kw))
    return program_semantics(p, lock_values=[2] if kw.get("locks") else None)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_blocker_restatement(seed):
    # condition 4 restated with event-level justification of the blocker
    es = small_program_es(seed, locks=True)
    J = es.alphabet.justifies
    for e in bits(es.read_mask):
        for d in range(es.n):
            base = J(es.labels[d], es.labels[e]) and not es.lt(e, d) and not es.conflicts(d, e)
            blocked = any(
                event_justifies(es, b, c)
                for b in range(es.n) if es.lt(d, b) and es.lt(b, e)
                for c in bits(es.cls[e])
            )
            assert event_justifies(es, d, e) == (base and not blocked)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_saturated_end_points_match_chain_oracle(seed):
    es = small_program_es(seed, max_threads=2)
    if es.n > 12:
        return
    configs = all_configurations(es)
    reach = acext_relation(es, configs)
    for c in configs:
        ends = {d for d in reach[c] if not any(d != x for x in reach[d])}
        assert saturated_reachable(es, c) == ends
