"""Sequential consistency, data races and the DRF theorem harness.

SC is decided by searching interleavings: a read may be appended when the
most recent event whose label could justify some member of the read's
primitive-conflict class is itself a justifier of the read.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .es import EventRef, EventStructure, bits
from .game import reachable_configurations
from .justify import event_justifies, is_justified, justifier_masks

MAX_COUNTEREXAMPLES = 20


def is_sequential(es: EventStructure) -> bool:
    """Every pair of distinct events is ordered or in conflict."""
    for e in range(es.n):
        related = es.down[e] | es.up[e] | es.conf[e]
        if related != es.all_mask:
            return False
    return True


# ------------------------------------------------------------------------ SC
#
# An interleaving state is the placed set plus, for every primitive-conflict
# class holding a read, the most recent placed event whose label could justify
# a member of that class. Only that event can justify a read appended next.
# For classes of releases the event itself is kept (the lock discipline needs
# its causal position); for other classes its label suffices.
#
# Releases outside the final set still have to be scheduled somewhere without
# being justified by a foreign acquire: either after the whole set, or in the
# untaken branch of a read, which forks off at the moment the taken sibling is
# placed. ``slots`` remembers, per release, the predecessors already placed at
# the latest fork where parking it would be safe.


class _ScTables:
    def __init__(self, es: EventStructure) -> None:
        J = es.alphabet.justifies
        self.es = es
        read_classes = sorted({es.cls[e] for e in bits(es.read_mask)}, key=lambda m: m & -m)
        self.class_idx = {m: i for i, m in enumerate(read_classes)}
        self.blockers = []
        self.keeps_event = []
        for m in read_classes:
            blk = 0
            for b in range(es.n):
                if any(J(es.labels[b], es.labels[c]) for c in bits(m)):
                    blk |= 1 << b
            self.blockers.append(blk)
            self.keeps_event.append(any(es.labels[c].kind == "LR" for c in bits(m)))
        self.lab_j = [[J(es.labels[b], es.labels[e]) for e in range(es.n)] for b in range(es.n)]
        labels = sorted(set(es.labels))
        self.label_id = [labels.index(a) for a in es.labels]
        self.rep = {labels.index(a): es.labels.index(a) for a in labels}
        self.acquires = sum(1 << e for e in range(es.n) if es.labels[e].kind == "LA")
        self.releases = [e for e in range(es.n) if es.labels[e].kind == "LR"]

    def start(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (-1,) * len(self.blockers), (-1,) * len(self.releases)

    def _event(self, k: int, tok: int) -> int:
        return tok if self.keeps_event[k] else self.rep[tok]

    def _safe(self, p: int, last: tuple[int, ...], f: int) -> bool:
        """Release ``f``, placed right after ``p``, is justified by no foreign acquire."""
        es = self.es
        if es.below[f] & self.acquires & ~p:
            # its own acquire can still be placed just before it
            return True
        k = self.class_idx[es.cls[f]]
        tok = last[k]
        if tok < 0:
            return True
        d = self._event(k, tok)
        return not self.lab_j[d][f] or es.leq(d, f)

    def can_append(self, last: tuple[int, ...], e: int) -> bool:
        es = self.es
        if es.read_mask >> e & 1:
            k = self.class_idx[es.cls[e]]
            tok = last[k]
            if tok < 0:
                return False
            d = self._event(k, tok)
            if not self.lab_j[d][e]:
                return False
            if es.labels[e].kind == "LR" and not es.leq(d, e):
                return False
        return True

    def final_ok(self, p: int, last: tuple[int, ...], slots: tuple[int, ...]) -> bool:
        """Every release outside ``p`` has a safe place in some branch."""
        es = self.es
        for i, f in enumerate(self.releases):
            if p >> f & 1:
                continue
            if not es.conf[f] & p and self._safe(p, last, f):
                continue
            if slots[i] >= 0 and not es.below[f] & p & ~slots[i]:
                continue
            return False
        return True

    def advance(
        self, p: int, last: tuple[int, ...], slots: tuple[int, ...], e: int
    ) -> tuple[tuple[int, ...], tuple[int, ...]]:
        es = self.es
        if self.releases and es.cls[e] != 1 << e:
            # placing e forks off its siblings' branches
            new = list(slots)
            for i, f in enumerate(self.releases):
                if f == e or p >> f & 1 or es.conf[f] & p or es.below[f] >> e & 1:
                    continue
                if self._safe(p, last, f):
                    new[i] = es.below[f] & p
            slots = tuple(new)
        lid = self.label_id[e]
        last = tuple(
            (e if keep else lid) if blk >> e & 1 else cur
            for cur, blk, keep in zip(last, self.blockers, self.keeps_event)
        )
        return last, slots


def _tables(es: EventStructure) -> _ScTables:
    return es.cached("sc_tables", lambda: _ScTables(es))


def sc_check(es: EventStructure, c: int | Iterable[EventRef]) -> tuple[bool, list[str] | None]:
    """Whether ``c`` has an interleaving in which every read sees a latest write.

    Acquires may only justify releases that causally follow them, including
    releases left outside ``c``. Returns the witness interleaving as event
    names on success.
    """
    c = es.mask(c)
    if not es.is_configuration(c):
        raise ValueError("not a configuration")
    tab = _tables(es)
    failed: set[tuple] = set()

    def go(p: int, last: tuple[int, ...], slots: tuple[int, ...]) -> list[int] | None:
        if p == c:
            return [] if tab.final_ok(p, last, slots) else None
        key = (p, last, slots)
        if key in failed:
            return None
        for e in bits(c & ~p):
            if es.below[e] & ~p or not tab.can_append(last, e):
                continue
            rest = go(p | 1 << e, *tab.advance(p, last, slots, e))
            if rest is not None:
                return [e] + rest
        failed.add(key)
        return None

    order = go(0, *tab.start())
    if order is None:
        return False, None
    return True, [es.names[e] for e in order]


def sc_configurations(es: EventStructure) -> frozenset[int]:
    """Every configuration with a valid interleaving."""

    def build() -> frozenset[int]:
        tab = _tables(es)
        start = (0, *tab.start())
        seen = {start}
        todo = deque([start])
        out = set()
        while todo:
            p, last, slots = todo.popleft()
            if p not in out and tab.final_ok(p, last, slots):
                out.add(p)
            for e in bits(es.enabled(p)):
                if not tab.can_append(last, e):
                    continue
                st = (p | 1 << e, *tab.advance(p, last, slots, e))
                if st not in seen:
                    seen.add(st)
                    todo.append(st)
        return frozenset(out)

    return es.cached("sc_configs", build)


# --------------------------------------------------------------------- races


@dataclass(frozen=True)
class Race:
    """Two concurrent events, with the events that witness the race.

    For a read-write race, ``d`` justifies ``witnesses[0]``, a primitive-conflict
    sibling (or ``e`` itself). For a write-write race, ``d`` and ``e`` justify
    ``witnesses[0]`` and ``witnesses[1]``, which share a primitive-conflict class.
    """

    kind: str
    d: int
    e: int
    witnesses: tuple[int, ...]

    def describe(self, es: EventStructure) -> dict:
        nm = es.names
        return {"kind": self.kind, "d": nm[self.d], "e": nm[self.e], "witnesses": [nm[w] for w in self.witnesses]}


def all_races(es: EventStructure) -> tuple[Race, ...]:
    """Races between any two concurrent events of the structure."""

    def build() -> tuple[Race, ...]:
        jm = justifier_masks(es)
        # justified[d]: events justified by d
        justified = [0] * es.n
        for e in range(es.n):
            for d in bits(jm[e]):
                justified[d] |= 1 << e
        out = []
        for d in range(es.n):
            for e in range(es.n):
                if d == e or not es.concurrent(d, e):
                    continue
                hit = justified[d] & es.cls[e]
                if hit:
                    out.append(Race("read-write", d, e, ((hit & -hit).bit_length() - 1,)))
                if d < e:
                    for b in bits(justified[d]):
                        cs = justified[e] & es.cls[b]
                        if cs:
                            out.append(Race("write-write", d, e, (b, (cs & -cs).bit_length() - 1)))
                            break
        return tuple(out)

    return es.cached("races", build)


def races(es: EventStructure, c: int | Iterable[EventRef]) -> list[Race]:
    c = es.mask(c)
    return [r for r in all_races(es) if c >> r.d & 1 and c >> r.e & 1]


def is_drf(es: EventStructure, c: int | Iterable[EventRef]) -> bool:
    return not races(es, c)


# -------------------------------------------------------- structural checks


def is_read_enabled(es: EventStructure) -> bool:
    """Each read has a causal predecessor justifying some primitive sibling."""
    for e in bits(es.read_mask):
        if not any(event_justifies(es, c, d) for c in bits(es.down[e]) for d in bits(es.cls[e])):
            return False
    return True


def is_commutative(es: EventStructure) -> bool:
    """Siblings of a justifier justify some sibling of what it justifies."""
    jm = justifier_masks(es)
    for e in range(es.n):
        for d in bits(jm[e]):
            for c in bits(es.cls[d]):
                if not any(jm[b] >> c & 1 for b in bits(es.cls[e])):
                    return False
    return True


def pre_justified(es: EventStructure, c: int | Iterable[EventRef]) -> bool:
    """Every read has a justifier inside ``c`` that is causally below it."""
    c = es.mask(c)
    jm = justifier_masks(es)
    return all(jm[r] & c & es.below[r] for r in bits(c & es.read_mask))


# ----------------------------------------------------------------- DRF report


@dataclass
class DrfReport:
    read_enabled: bool
    commutative: bool
    premise_holds: bool
    premise_counterexamples: list[tuple[int, Race]] = field(default_factory=list)
    conclusion_holds: bool = True
    conclusion_counterexamples: list[int] = field(default_factory=list)
    sc_count: int = 0
    wj_count: int = 0

    @property
    def bug_alarm(self) -> bool:
        return self.read_enabled and self.commutative and self.premise_holds and not self.conclusion_holds

    def to_json(self, es: EventStructure) -> dict:
        return {
            "read_enabled": self.read_enabled,
            "commutative": self.commutative,
            "premise_holds": self.premise_holds,
            "premise_counterexamples": [
                {"configuration": es.names_of(c), "race": r.describe(es)} for c, r in self.premise_counterexamples
            ],
            "conclusion_holds": self.conclusion_holds,
            "conclusion_counterexamples": [es.names_of(c) for c in self.conclusion_counterexamples],
            "sc_configurations": self.sc_count,
            "well_justified_configurations": self.wj_count,
            "bug_alarm": self.bug_alarm,
        }


def drf_report(es: EventStructure) -> DrfReport:
    """Evaluate premises and conclusion of the DRF theorem exhaustively."""
    sc = sc_configurations(es)
    racy_pairs = all_races(es)
    prem_cex: list[tuple[int, Race]] = []
    premise = True
    for c in sorted(sc):
        for r in racy_pairs:
            if c >> r.d & 1 and c >> r.e & 1:
                premise = False
                if len(prem_cex) < MAX_COUNTEREXAMPLES:
                    prem_cex.append((c, r))
                break
    wj = [c for c in reachable_configurations(es) if is_justified(es, c)]
    concl_cex = sorted(c for c in wj if c not in sc)
    return DrfReport(
        read_enabled=is_read_enabled(es),
        commutative=is_commutative(es),
        premise_holds=premise,
        premise_counterexamples=prem_cex,
        conclusion_holds=not concl_cex,
        conclusion_counterexamples=concl_cex[:MAX_COUNTEREXAMPLES],
        sc_count=len(sc),
        wj_count=len(wj),
    )
