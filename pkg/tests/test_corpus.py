import pytest

from esmem.corpus import (
    CorpusEntry, CorpusError, entry_from_dict, evaluate, load_corpus, parse_values,
    results_json, run_corpus, run_entry, shipped_corpus_path, verdict_table,
)
from esmem.logic import CapacityError
from esmem.query import QueryError
from esmem.semantics import compile_program

from conftest import ids, program

P1 = "r1=x; y=r1; || r2=y; x=r2;"


def test_parse_values():
    assert parse_values("0..2") == (0, 1, 2)
    assert parse_values("2,0, 1") == (0, 1, 2)
    assert parse_values([1, 1, 0]) == (0, 1)
    assert parse_values(None) == (0, 1)
    for bad in ("", "a..b", "x"):
        with pytest.raises(CorpusError):
            parse_values(bad)


def test_entry_validation():
    with pytest.raises(CorpusError, match="unspecified"):
        CorpusEntry("e", "exists R x 1", {"wj": "unspecified"}, program=P1)
    with pytest.raises(CorpusError):
        CorpusEntry("e", "exists R x 1", {"wj": "maybe"}, program=P1)
    with pytest.raises(CorpusError):
        CorpusEntry("e", "exists R x 1", {"tso": "allowed"}, program=P1)
    with pytest.raises(CorpusError, match="exactly one"):
        CorpusEntry("e", "exists R x 1", {"wj": "allowed"})
    with pytest.raises(CorpusError, match="exactly one"):
        CorpusEntry("e", "exists R x 1", {"wj": "allowed"}, program=P1, es_json="a.json")
    with pytest.raises(CorpusError):
        CorpusEntry("e", "exists R", {"wj": "allowed"}, program=P1)
    e = CorpusEntry("e", "exists R x 1", {"well-justified": "allowed", "sc": "unspecified"}, program=P1)
    assert e.expect == {"wj": "allowed", "sc": "unspecified"}


def test_entry_from_dict_errors():
    with pytest.raises(CorpusError, match="unknown keys"):
        entry_from_dict({"name": "a", "query": "true", "expect": {"wj": "allowed"}, "program": P1, "bogus": 1})
    with pytest.raises(CorpusError, match="missing"):
        entry_from_dict({"name": "a", "program": P1, "expect": {"wj": "allowed"}})
    with pytest.raises(CorpusError):
        entry_from_dict(["not", "a", "mapping"])


def test_load_corpus_shapes():
    assert load_corpus("") == []
    assert load_corpus("entries: []") == []
    entry = "- {name: a, program: 'x=1;', query: 'exists W x 1', expect: {wj: allowed}}\n"
    assert [e.name for e in load_corpus(entry)] == ["a"]
    with pytest.raises(CorpusError, match="duplicate"):
        load_corpus(entry + entry)
    with pytest.raises(CorpusError):
        load_corpus("{a: 1}")
    with pytest.raises(CorpusError):
        load_corpus("- [unbalanced")


def test_evaluate_verdicts():
    es = program("P1")
    v = evaluate(es, "exists R x 1 && exists R y 1", "wj")
    assert not v.allowed and v.witness is None and v.candidates == 1
    v = evaluate(es, "exists R x 0 && exists R y 0", "sc")
    assert v.allowed and ids(es, v.witness) >= {"init"}
    assert evaluate(program("P2"), "exists R x 1 && exists R y 1", "wj").allowed
    assert not evaluate(program("P2"), "exists R x 1 && exists R y 1", "sc").allowed


def test_evaluate_rejects_foreign_atoms():
    with pytest.raises(QueryError):
        evaluate(program("P1"), "exists R z 1", "wj")


def test_capacity_guard():
    text = " || ".join(f"r{i}={v};" for i, v in enumerate("abcdefg"))
    es = compile_program(text, range(10))
    assert es.n > 64
    with pytest.raises(CapacityError):
        evaluate(es, "true", "acyclic")


def test_verdict_table_modes_are_consistent():
    es = program("P3")
    table = verdict_table(es, ["wj", "sc", "acyclic"])
    assert set(table) == set(es.maximal_configurations())
    for row in table.values():
        assert not row["sc"] or row["wj"]


def test_shipped_corpus_passes():
    path = shipped_corpus_path()
    entries = load_corpus(path.read_text())
    assert len(entries) >= 16
    results = run_corpus(entries, path.parent)
    assert [r.entry for r in results] == [e.name for e in entries]
    failing = [(r.entry, r.rows, r.error) for r in results if not r.passed]
    assert failing == []


def test_parallel_order_is_deterministic():
    path = shipped_corpus_path()
    entries = load_corpus(path.read_text())[:6]
    seq = run_corpus(entries, path.parent, jobs=1)
    par = run_corpus(entries, path.parent, jobs=3)
    assert [r.entry for r in par] == [r.entry for r in seq]
    assert [r.rows for r in par] == [r.rows for r in seq]


def test_mismatch_reported_not_raised():
    e = CorpusEntry("flip", "exists R x 1 && exists R y 1", {"wj": "allowed"}, program=P1)
    r = run_entry(e)
    assert not r.passed and r.rows == [("wj", "allowed", "forbidden", False)]


def test_errors_and_timeouts_are_per_entry(tmp_path):
    missing = CorpusEntry("missing", "true", {"wj": "allowed"}, es_json="nope.json")
    slow = CorpusEntry("slow", "exists R x 1 && exists R y 1", {"wj": "forbidden"},
                       program="r1=x; if(r1<2){y=1;} || x=2; || r2=y; x=r2;", values=(0, 1, 2))
    ok = CorpusEntry("ok", "exists W x 1", {"wj": "allowed"}, program="x=1;")
    res = run_corpus([missing, slow, ok], tmp_path, timeout=1e-4)
    assert res[0].error and not res[0].passed
    assert res[1].timed_out and not res[1].passed
    assert '"timed_out": true' in results_json(res)
