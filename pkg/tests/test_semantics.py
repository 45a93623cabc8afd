import random

import pytest
from hypothesis import given, settings, strategies as st

from esmem.es import Action, bits, default_alphabet, find_isomorphism, isomorphic, validate
from esmem.lang import Program, Thread, desugar, parse_program
from esmem.randprog import ProgramShape, random_program
from esmem.semantics import SemanticsError, compile_program, program_alphabet, program_semantics, thread_semantics

from conftest import PROGRAMS, figure, ids, program

R, W = Action.read, Action.write


def jpairs(alphabet):
    acts = alphabet.actions()
    return {(a, b) for a in acts for b in acts if alphabet.justifies(a, b)}


def test_justification_pairs_one_variable():
    a = default_alphabet({"x"}, {0, 1})
    assert jpairs(a) == {(Action.init(), R("x", 0)), (W("x", 0), R("x", 0)), (W("x", 1), R("x", 1))}


def test_justification_pairs_with_rmw():
    a = default_alphabet({"x"}, {0, 1}, rmw=True)
    rmw = Action.rmw
    writers = [(Action.init(), 0)] + [(W("x", v), v) for v in (0, 1)]
    writers += [(rmw("x", o, n), n) for o in (0, 1) for n in (0, 1)]
    readers = [(R("x", v), v) for v in (0, 1)] + [(rmw("x", o, n), o) for o in (0, 1) for n in (0, 1)]
    expected = {(w, r) for w, wv in writers for r, rv in readers if wv == rv}
    assert jpairs(a) == expected


def test_lock_pairs():
    a = default_alphabet({"x"}, {0, 1, 2}, True)
    la, lr = Action.acq, Action.rel
    assert a.sync(lr(2), la(2))
    assert a.sync(la(2), lr(2)) and a.sync(Action.init(), la(2))
    assert not a.sync(lr(1), la(2))
    sync = {(p, q) for p in a.actions() for q in a.actions() if a.sync(p, q)}
    assert sync <= jpairs(a)


def test_init_acquire_scope_flag():
    a = default_alphabet({"x"}, {0, 1, 2}, True, init_lock_zero_only=True)
    assert a.sync(Action.init(), Action.acq(0))
    assert not a.sync(Action.init(), Action.acq(2))


def test_value_set_needs_zero():
    with pytest.raises(ValueError):
        default_alphabet({"x"}, {1, 2})


def test_section2_thread_figure():
    p = desugar(parse_program("if (x==0) {y=1;}"))
    es = program_semantics(p)
    assert es.n == 4
    labels = sorted(str(a) for a in es.labels)
    assert labels == ["R x 0", "R x 1", "W y 1", "init"]
    r0, r1, w = (es.labels.index(R("x", 0)), es.labels.index(R("x", 1)), es.labels.index(W("y", 1)))
    assert es.cls[r0] == 1 << r0 | 1 << r1
    assert es.lt(r0, w) and not es.leq(r1, w)


def test_empty_thread_is_empty_structure():
    a = default_alphabet({"x"}, {0, 1})
    assert thread_semantics((), {}, a).n == 0
    es = program_semantics(Program((Thread(()),)))
    assert es.n == 1 and str(es.labels[0]) == "init"


def test_cas_read_only_policy():
    p = parse_program("cas(x,0,1,r);")
    es = program_semantics(p, cas_policy="read-only")
    a, b = (e for e in range(es.n) if es.labels[e].kind != "init")
    assert {str(es.labels[a]), str(es.labels[b])} == {"RMW x 0 1", "R x 1"}
    assert es.cls[a] == es.cls[b] == 1 << a | 1 << b


def test_cas_read_write_policy():
    es = program_semantics(parse_program("cas(x,0,1,r);"))
    assert sorted(str(a) for a in es.labels) == ["RMW x 0 1", "RMW x 1 1", "init"]


def test_cas_result_register():
    es = compile_program("cas(x,0,1,r); y=r;")
    after = {str(es.labels[e]) for e in range(es.n) if es.labels[e].kind == "W"}
    assert after == {"W y 1", "W y 0"}


def test_p1_has_nine_events_like_its_figure():
    es = program("P1")
    assert es.n == 9
    assert isomorphic(es, figure("P1"))


def test_p4_write_only_below_init():
    es = program("P4")
    assert es.n == 8
    (w,) = [e for e in range(es.n) if es.labels[e] == W("x", 1)]
    assert ids(es, es.below[w]) == {"init"}


def test_write_out_of_range_rejected():
    with pytest.raises(SemanticsError):
        compile_program("r=x; y=r+1;", (0, 1))


def test_lock_without_lock_values_uses_value_set():
    es = compile_program("acq(1); rel(1);", (0, 1))
    assert es.alphabet.with_lock and 1 in es.alphabet.lock_values


def test_program_alphabet_detects_constructs():
    a = program_alphabet(parse_program("cas(x,0,1,r); || y=1;"))
    assert a.rmw and a.variables == {"x", "y"} and not a.with_lock


@pytest.mark.parametrize("name", sorted(PROGRAMS))
def test_named_programs_validate(name):
    assert validate(program(name)) == []


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_programs_are_confusion_free(seed):
    p = random_program(random.Random(seed), ProgramShape(locks=True))
    es = program_semantics(p, lock_values=[2])
    assert validate(es) == []
    # conflict only arises from reads
    for m in es.classes:
        if m & (m - 1):
            assert all(es.alphabet.is_read(es.labels[e]) for e in bits(m))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_thread_order_commutes(seed):
    p = random_program(random.Random(seed), ProgramShape())
    a = program_semantics(p)
    b = program_semantics(Program(tuple(reversed(p.threads))), a.alphabet)
    assert find_isomorphism(a, b) is not None
