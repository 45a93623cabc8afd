import itertools
import random

from hypothesis import given, settings, strategies as st

from esmem.es import AugmentationError, augment, default_alphabet, orient
from esmem.fence import (
    _FenceSearch,
    fencings, is_fenced, respects_lock_discipline, sync_events, sync_justifies, unfenced, well_fenced,
    well_fenced_configurations,
)
from esmem.game import reachable_configurations, well_justified_configurations
from esmem.justify import is_justified
from esmem.randprog import ProgramShape, random_program
from esmem.semantics import compile_program, program_semantics
from esmem.seqcon import sc_configurations

from conftest import config_with, figure, program


def fencing_orders_oracle(es):
    """Every subset of sync-pair orientations that ends up a fenced, lock-disciplined augmentation."""
    sync = sync_events(es)
    pairs = [
        (d, e) for d in sync for e in sync
        if d != e and not (es.leq(d, e) or es.leq(e, d) or es.conflicts(d, e))
    ]
    out = {}
    for k in range(len(pairs) + 1):
        for sub in itertools.combinations(pairs, k):
            extra = frozenset().union(*(orient(es, d, e) for d, e in sub))
            try:
                aug = augment(es, extra).es
            except AugmentationError:
                continue
            if is_fenced(aug) and respects_lock_discipline(aug, es):
                out[aug.below] = aug
    return out


def fenced_oracle(es):
    out = set()
    for aug in fencing_orders_oracle(es).values():
        out |= {c for c in reachable_configurations(aug) if is_justified(aug, c)}
    return out


class _Uncut(_FenceSearch):
    """The same decision search with no cuts, branching in a fixed order."""

    def run(self):
        es = self.es

        def go(down, added, never, open_pairs):
            open_pairs = [p for p in open_pairs if self._concurrent(down, *p)]
            if not open_pairs:
                if not self._violations(down):
                    yield added
                return
            pick, rest = open_pairs[0], open_pairs[1:]
            yield from go(down, added, never + [pick], rest)
            for x, y in (pick, pick[::-1]):
                nxt = self._add(down, x, y)
                if nxt is not None and not any(nxt[b] >> a & 1 or nxt[a] >> b & 1 for a, b in never):
                    yield from go(nxt, added + ((x, y),), never, rest)

        yield from go(list(es.down), (), [], self.pairs)


def test_p5_sync_justification():
    f = figure("P5")
    assert sync_justifies(f, "57", "52")
    assert not sync_justifies(f, "53", "54")
    assert not is_fenced(f)
    assert ("57", "52") in {(f.names[d], f.names[e]) for d, e in unfenced(f)}


def test_lock_free_is_trivially_fenced():
    es = program("P1")
    assert sync_events(es) == []
    assert is_fenced(es)
    (only,) = fencings(es)
    assert only.es is es and only.added == frozenset()


def test_sequential_structure_is_fenced():
    es = compile_program("acq(2); x=1; rel(2); acq(2); r=x; rel(2);", lock_values=(2,))
    assert is_fenced(es)


def test_p5_fencings():
    f = figure("P5")
    got = {tuple(sorted(aug.added_names())) for aug in fencings(f)}
    assert (("57", "52"),) in got
    # the two releases after the read are in conflict, so each gets its own fencing
    assert (("58", "51"),) in got and (("59", "51"),) in got
    assert len(got) == 3


def test_p5_joint_release_ordering_is_self_conflicting():
    f = figure("P5")
    try:
        augment(f, [("58", "51"), ("59", "51")])
    except AugmentationError as exc:
        assert "self-conflict" in str(exc)
    else:
        raise AssertionError("expected a self-conflict")


def test_p5_well_fenced():
    f = figure("P5")
    (x1,) = config_with(f, "R x 1")
    (x0,) = config_with(f, "R x 0")
    assert well_fenced(f, x1) == (False, None)
    ok, (aug, _) = well_fenced(f, x0)
    assert ok and aug.es.is_configuration(x0)
    assert x1 in well_justified_configurations(f)
    assert not any(c >> f.ev("55") & 1 for c in well_fenced_configurations(f))


def test_sc_configurations_are_well_fenced():
    for name in ("P1", "P3", "P5"):
        es = program(name)
        assert sc_configurations(es) <= well_fenced_configurations(es)


def test_empty_lock_relation_has_no_sync():
    a = default_alphabet({"x"}, {0, 1})
    es = program("P2")
    assert es.alphabet.with_lock is False and a.with_lock is False
    assert not any(sync_justifies(es, d, e) for d in range(es.n) for e in range(es.n))


def lock_es(seed, **kw):
    p = random_program(random.Random(seed), ProgramShape(**kw))
    return program_semantics(p, lock_values=[2])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([dict(locks=True, max_threads=2), dict(lock_only=True)]))
def test_fencing_search_matches_brute_force(seed, kw):
    es = lock_es(seed, **kw)
    sync = sync_events(es)
    n_pairs = sum(1 for i, d in enumerate(sync) for e in sync[i + 1:] if es.concurrent(d, e))
    if n_pairs > 6 or es.n > 14:
        return
    want = fencing_orders_oracle(es)
    got = [aug.es.below for aug in fencings(es)]
    assert len(got) == len(set(got))
    assert set(got) == set(want)
    assert set(well_fenced_configurations(es)) == fenced_oracle(es)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([
    dict(locks=True, max_threads=3, max_stmts=2), dict(lock_only=True), dict(locks=True, max_threads=2),
]))
def test_cuts_lose_no_fencing(seed, kw):
    es = lock_es(seed, **kw)
    search = _FenceSearch(es)
    if len(search.pairs) > 12:
        return
    got = {tuple(search.order_of(a)) for a in search.run()}
    assert got == {tuple(search.order_of(a)) for a in _Uncut(es).run()}


def test_three_critical_sections_stay_tractable():
    es = compile_program(
        "acq(2); y=0; r1=y; rel(2); || acq(2); y=1; x=1; r1=x; rel(2); || acq(2); r1=x; r2=y; rel(2);",
        lock_values=(2,),
    )
    augs = list(fencings(es))
    assert len(augs) == len({a.es.below for a in augs}) == 56
    assert all(is_fenced(a.es) and respects_lock_discipline(a.es, es) for a in augs)
    assert sc_configurations(es) <= well_fenced_configurations(es)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fencings_are_fenced_augmentations(seed):
    es = lock_es(seed, locks=True)
    for aug in fencings(es):
        assert is_fenced(aug.es) and respects_lock_discipline(aug.es, es)
        for d, e in aug.added:
            assert d in sync_events(es) and e in sync_events(es)
        for e in range(es.n):
            assert es.below[e] & ~aug.es.below[e] == 0
