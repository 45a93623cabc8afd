"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py``; the lines are repeated in the
terminal summary.  Two literal lines are known to be unattainable and are
strict xfails, so they print FAIL while the run stays green:

* TC9' ``exists R y 1`` under wj (an SC interleaving reaches R y 1);
* pre-justified => sc without the race-freedom premises (store buffering).
"""

import random
from collections import Counter
from functools import lru_cache

import pytest

from esmem.corpus import entry_from_dict, load_corpus, run_corpus, shipped_corpus_path
from esmem.es import isomorphic
from esmem.game import ae_justifies
from esmem.justify import saturated_reachable
from esmem.logic import And, NotEq, invariant_counterexample, is_invariant, is_tautology
from esmem.seqcon import sc_configurations
from esmem.sweep import (
    ACYCLIC_WJ, DRF, FENCED_SC, FENCED_WJ, INVARIANT, PJ_SC, PJ_SC_PREMISES, SC_WJ, SweepShape, check_structure,
    corpus_structures, is_lock_only, random_structures,
)

from conftest import figure, ids, program, record_acceptance
from oracles import acext_relation, ae_oracle, all_configurations, sc_oracle

ENTRY_SECONDS = 10.0
SWEEP_SEED = 2024
SWEEP_COUNT = 500

# criterion item -> (corpus entry, modes checked)
VERDICTS = [
    ("P1 both-read-1", "P1-both-1"),
    ("P1 both-read-0", "P1-both-0"),
    ("P2 both-read-1", "P2-both-1"),
    ("P3 both-read-1", "P3-both-1"),
    ("P3 conditional R y 1", "P3-conditional-y1"),
    ("P4 R y 1", "P4-y1"),
    ("P4 R y 1 and R x 0", "P4-y1-x0"),
    ("P5 R x 1", "P5-x1"),
    ("TC7 all-three-read-1", "TC7-all-1"),
    ("P6 R z 0 with R x 1 or R y 1", "P6-z0-and-1"),
    ("race example mixed configuration", "race-mixed"),
]


# ---------------------------------------------------------------- criterion 1


@lru_cache(maxsize=None)
def corpus_results():
    path = shipped_corpus_path()
    entries = load_corpus(path.read_text())
    return {r.entry: r for r in run_corpus(entries, path.parent, timeout=ENTRY_SECONDS)}


def _describe(r):
    rows = ", ".join(f"{m} {a}" for m, _, a, _ in r.rows)
    return f"{rows} ({r.seconds:.2f} s)"


@pytest.mark.parametrize("item,entry", VERDICTS, ids=[e for _, e in VERDICTS])
def test_criterion1_verdict(item, entry):
    r = corpus_results()[entry]
    ok = r.passed and r.seconds < ENTRY_SECONDS
    assert record_acceptance("1", ok, f"{item}: {_describe(r)}")


def test_criterion1_whole_corpus():
    results = corpus_results()
    bad = [name for name, r in results.items() if not (r.passed and r.seconds < ENTRY_SECONDS)]
    slowest = max(r.seconds for r in results.values())
    assert record_acceptance("1", not bad, f"shipped corpus: {len(results)} entries, failing {bad}, slowest {slowest:.2f} s")


@pytest.mark.xfail(strict=True, reason="R x 0; W y 1; R y 1; W x 1 is an SC interleaving, so R y 1 is well-justified")
def test_criterion1_tc9_literal():
    entry = entry_from_dict({
        "name": "TC9p-y1",
        "program": "r1=x; if(r1<2){y=1;} || x=2; || r2=y; x=r2;",
        "values": "0..2",
        "query": "exists R y 1",
        "expect": {"wj": "forbidden"},
    })
    (r,) = run_corpus([entry], timeout=ENTRY_SECONDS)
    assert record_acceptance("1", r.passed, f"TC9' R y 1 (literal, expected failure): {_describe(r)}")


# ---------------------------------------------------------------- criterion 2


@lru_cache(maxsize=None)
def sweep_structures():
    rng = random.Random(SWEEP_SEED)
    randoms = [es for _, es in random_structures(rng, SWEEP_COUNT, SweepShape(max_threads=3, max_stmts=3))]
    return randoms, [es for _, es in corpus_structures()]


@lru_cache(maxsize=None)
def sweep_totals():
    randoms, corpus = sweep_structures()
    rng = random.Random(SWEEP_SEED)
    total = Counter()
    for es in randoms + corpus:
        total += check_structure(es, rng)
    return total


def test_criterion2_instances():
    randoms, corpus = sweep_structures()
    lock_only = sum(is_lock_only(es) for es in randoms)
    ok = len(randoms) >= 500 and lock_only > 0
    assert record_acceptance("2", ok, f"{len(randoms)} random + {len(corpus)} corpus structures ({lock_only} lock-only)")


@pytest.mark.parametrize("prop", [SC_WJ, ACYCLIC_WJ, PJ_SC_PREMISES, DRF, FENCED_WJ, FENCED_SC, INVARIANT])
def test_criterion2_property(prop):
    n = sweep_totals()[prop]
    assert record_acceptance("2", n == 0, f"{prop}: {n} violations")


@pytest.mark.xfail(strict=True, reason="store buffering is pre-justified but not SC")
def test_criterion2_pre_justified_literal():
    n = sweep_totals()[PJ_SC]
    assert record_acceptance("2", n == 0, f"{PJ_SC} (literal, expected failure): {n} violations")


# ---------------------------------------------------------------- criterion 3


def test_criterion3_ae_and_acext():
    randoms, _ = sweep_structures()
    small = [es for es in randoms if es.n <= 12]
    pairs = ae_bad = ends_bad = 0
    for es in small:
        configs = all_configurations(es)
        reach = acext_relation(es, configs)
        for c in configs:
            ends = {d for d in reach[c] if not any(d != x for x in reach[d])}
            ends_bad += saturated_reachable(es, c) != ends
            for d in configs:
                if c & ~d == 0:
                    pairs += 1
                    ae_bad += ae_justifies(es, c, d) != ae_oracle(es, reach, c, d)
    ok = record_acceptance("3", ae_bad == 0, f"ae saturation vs game definition: {len(small)} ES, {pairs} pairs, {ae_bad} mismatches")
    ok &= record_acceptance("3", ends_bad == 0, f"acext saturation vs chain oracle: {len(small)} ES, {ends_bad} mismatches")
    assert ok


def test_criterion3_sc():
    randoms, _ = sweep_structures()
    small = [es for es in randoms if es.n <= 9]
    bad = sum(set(sc_configurations(es)) != sc_oracle(es) for es in small)
    assert record_acceptance("3", bad == 0, f"sc linearization vs augmentation brute force: {len(small)} ES, {bad} mismatches")


# ---------------------------------------------------------------- criterion 4


@pytest.mark.parametrize("name", ["P1", "P3", "P4", "P5", "P6", "TC7"])
def test_criterion4_figure(name):
    es, fig = program(name), figure(name)
    assert record_acceptance("4", isomorphic(es, fig), f"{name}: program semantics ({es.n} events) isomorphic to figure ({fig.n})")


# ---------------------------------------------------------------- criterion 5

NO_ONES = And(NotEq("x", 1), NotEq("y", 1))


def test_criterion5_p1():
    es = figure("P1")
    inv, taut = is_invariant(es, NO_ONES), is_tautology(es, NO_ONES)
    assert record_acceptance("5", inv and taut, f"P1, x!=1 && y!=1: invariant {inv}, tautology {taut}")


def test_criterion5_p3():
    es = figure("P3")
    inv = is_invariant(es, NO_ONES)
    witness = invariant_counterexample(es, NO_ONES)
    got = sorted(ids(es, witness)) if witness is not None else None
    ok = not inv and got == ["30", "31", "35"]
    assert record_acceptance("5", ok, f"P3, x!=1 && y!=1: invariant {inv}, witness {got}")
