"""Synchronous justification, fenced augmentations and well-fenced configurations.

Only events labelled init, acquire or release take part in synchronisation,
and fencings only add order between such events: each unordered sync pair is
ordered one way, the other way, or left unordered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .es import Augmentation, AugmentationError, EventRef, EventStructure, augment, bits, orient
from .game import GameTrace, reachable_configurations, well_justified
from .justify import event_justifies, is_justified

def sync_justifies(es: EventStructure, d: EventRef, e: EventRef) -> bool:
    d, e = es.ev(d), es.ev(e)
    return es.alphabet.sync(es.labels[d], es.labels[e]) and event_justifies(es, d, e)


def sync_events(es: EventStructure) -> list[int]:
    a = es.alphabet
    if not a.with_lock:
        return []
    return [e for e, lab in enumerate(es.labels) if lab.is_lock or lab.kind == "init"]


def unfenced(es: EventStructure) -> Iterator[tuple[int, int]]:
    """Synchronous justifications that are not causally ordered."""
    sync = sync_events(es)
    for e in sync:
        for d in sync:
            if d != e and not es.leq(d, e) and sync_justifies(es, d, e):
                yield (d, e)


def is_fenced(es: EventStructure) -> bool:
    return next(unfenced(es), None) is None


def lock_breaches(aug: EventStructure, base: EventStructure) -> Iterator[tuple[int, int]]:
    """Acquires justifying a release that does not causally follow them in ``base``."""
    for e, lab in enumerate(aug.labels):
        if lab.kind != "LR":
            continue
        for d, dl in enumerate(aug.labels):
            if dl.kind == "LA" and not base.leq(d, e) and event_justifies(aug, d, e):
                yield (d, e)


def respects_lock_discipline(aug: EventStructure, base: EventStructure) -> bool:
    return next(lock_breaches(aug, base), None) is None


class _FenceSearch:
    """Decide every unordered sync pair once: one way, the other, or never.

    Justification only shrinks as order grows (more blockers, more conflict),
    so a violation present now is present in every completion unless the
    open pairs could still order it, reverse it, insert a blocker or put it
    in conflict. Each of those needs some currently open pair, so branches
    with a violation that no open pair can touch are cut, and branching
    follows the violation with the fewest such pairs.
    """

    def __init__(self, es: EventStructure) -> None:
        self.es = es
        n = self.n = es.n
        a, lab = es.alphabet, es.labels
        self.sync = sync_events(es)
        self.jto = [sum(1 << b for b in range(n) if a.justifies(lab[b], lab[c])) for c in range(n)]
        self.kto = [sum(1 << b for b in range(n) if a.sync(lab[b], lab[c])) for c in range(n)]
        self.multi = [k for k in es.classes if k & (k - 1)]
        self.acquires = [e for e in self.sync if lab[e].kind == "LA"]
        self.releases = [e for e in self.sync if lab[e].kind == "LR"]
        self.pairs = [(d, e) for i, d in enumerate(self.sync) for e in self.sync[i + 1:] if es.concurrent(d, e)]

    # -- order arithmetic on reflexive down-sets
    def _conflict(self, down: list[int], x: int, y: int) -> bool:
        for k in self.multi:
            a, b = down[x] & k, down[y] & k
            if a and b and (a | b) & ((a | b) - 1):
                return True
        return False

    def _concurrent(self, down: list[int], x: int, y: int) -> bool:
        return not (down[y] >> x & 1 or down[x] >> y & 1 or self._conflict(down, x, y))

    def _add(self, down: list[int], x: int, y: int) -> list[int] | None:
        """Order ``x`` before ``y`` and its siblings; None if that is invalid."""
        down = list(down)
        dx = down[x]
        for s in bits(self.es.cls[y]):
            if dx >> s & 1:
                return None
            for z in range(self.n):
                if down[z] >> s & 1:
                    down[z] |= dx
        for z in range(self.n):
            for k in self.multi:
                m = down[z] & k
                if m & (m - 1):
                    return None
        return down

    def _blocked(self, down: list[int], d: int, e: int) -> bool:
        for c in bits(self.es.cls[e]):
            for b in bits(down[c] & self.jto[c] & ~(1 << c | 1 << d)):
                if down[b] >> d & 1:
                    return True
        return False

    def _justifies(self, down: list[int], d: int, e: int) -> bool:
        if d == e or not self.jto[e] >> d & 1 or down[d] >> e & 1 or self._conflict(down, d, e):
            return False
        return not self._blocked(down, d, e)

    def _violations(self, down: list[int]) -> list[tuple[bool, int, int]]:
        """(unfenced?, d, e) for unordered sync justifications and lock breaches."""
        out = []
        for e in self.sync:
            for d in bits(self.kto[e] & ~down[e]):
                if self._justifies(down, d, e):
                    out.append((True, d, e))
        base = self.es.down
        for e in self.releases:
            for d in self.acquires:
                if not base[e] >> d & 1 and self._justifies(down, d, e):
                    out.append((False, d, e))
        return out

    def _cures(self, down: list[int], is_open, unfenced_: bool, d: int, e: int) -> list[tuple[int, int]]:
        """Open pairs whose decision could cure the violation.

        A sync pair that is unordered now and ordered in a completion is open
        now, so every cure needs at least one of the listed pairs: the pair
        itself (order or reverse it), a link of a blocker ``d < b < c``, or a
        link ``x < d`` (``x < e``) from above a primitive sibling, for conflict.
        """
        out = []
        if is_open(d, e):
            out.append((d, e))
        for c in bits(self.es.cls[e]):
            for b in bits(self.jto[c] & ~(1 << c | 1 << d)):
                lo, hi = down[b] >> d & 1, down[c] >> b & 1
                if (lo or is_open(d, b)) and (hi or is_open(b, c)):
                    out.extend(p for p, ok in (((d, b), lo), ((b, c), hi)) if not ok)
        for k in self.multi:
            links = {}
            for t in (d, e):
                for a in bits(k):
                    if down[t] >> a & 1:
                        links[t, a] = []
                    else:
                        via = [(x, t) for x in self.sync if down[x] >> a & 1 and is_open(x, t)]
                        if via:
                            links[t, a] = via
            for a in bits(k):
                for a2 in bits(k & ~(1 << a)):
                    if (d, a) in links and (e, a2) in links:
                        out.extend(links[d, a] + links[e, a2])
        return out

    def order_of(self, decisions: Iterable[tuple[int, int]]) -> list[int] | None:
        down: list[int] | None = list(self.es.down)
        for x, y in decisions:
            down = self._add(down, x, y)
            if down is None:
                return None
        return down

    def minimal(self, decisions: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
        """Drop decisions implied by the others (greedy, in order)."""
        target = self.order_of(decisions)
        keep = list(decisions)
        for dec in decisions:
            trial = [x for x in keep if x != dec]
            if self.order_of(trial) == target:
                keep = trial
        return tuple(keep)

    def run(self) -> Iterator[tuple[tuple[int, int], ...]]:
        """The orientation decisions of every fencing, in a deterministic order."""
        es = self.es

        def go(down, added, never, open_pairs):
            open_pairs = [p for p in open_pairs if self._concurrent(down, *p)]
            viol = self._violations(down)
            if not open_pairs:
                if not viol:
                    yield added
                return
            pick = None
            if viol:
                keys = {frozenset(p): p for p in open_pairs}

                def is_open(x: int, y: int) -> bool:
                    return frozenset((x, y)) in keys

                best = None
                for v in viol:
                    cures = self._cures(down, is_open, *v)
                    if not cures:
                        return
                    if best is None or len(cures) < len(best):
                        best = cures
                pick = keys[frozenset(best[0])]
            pick = pick or open_pairs[0]
            rest = [p for p in open_pairs if p != pick]
            yield from go(down, added, never + [pick], rest)
            for x, y in (pick, pick[::-1]):
                nxt = self._add(down, x, y)
                if nxt is None or any(nxt[b] >> a & 1 or nxt[a] >> b & 1 for a, b in never):
                    continue
                yield from go(nxt, added + ((x, y),), never, rest)

        yield from go(list(es.down), (), [], self.pairs)


def fencings(es: EventStructure) -> Iterator[Augmentation]:
    """Fenced augmentations adding order between sync events, without duplicates.

    An acquire may only justify a release that already follows it causally.
    """
    search = _FenceSearch(es)
    emitted: set[tuple[int, ...]] = set()
    for decisions in search.run():
        added = frozenset().union(*(orient(es, x, y) for x, y in search.minimal(decisions)))
        try:
            aug = augment(es, added)
        except AugmentationError:
            continue
        if aug.es.below in emitted or not is_fenced(aug.es) or not respects_lock_discipline(aug.es, es):
            continue
        emitted.add(aug.es.below)
        yield aug


def _fencing_list(es: EventStructure) -> tuple[Augmentation, ...]:
    return es.cached("fencings", lambda: tuple(fencings(es)))


def well_fenced(
    es: EventStructure, c: int | Iterable[EventRef], *, explain: bool = False
) -> tuple[bool, tuple[Augmentation, GameTrace | None] | None]:
    """Well-justified in some fencing that keeps ``c`` a configuration."""
    c = es.mask(c)
    if not es.is_configuration(c):
        raise ValueError("not a configuration")
    for aug in _fencing_list(es):
        if not aug.es.is_configuration(c):
            continue
        ok, trace = well_justified(aug.es, c, explain=explain)
        if ok:
            return True, (aug, trace)
    return False, None


def well_fenced_configurations(es: EventStructure) -> frozenset[int]:
    def build() -> frozenset[int]:
        out: set[int] = set()
        for aug in _fencing_list(es):
            out |= {c for c in reachable_configurations(aug.es) if is_justified(aug.es, c)}
        return frozenset(out)

    return es.cached("well_fenced", build)


@dataclass(frozen=True)
class FencingSummary:
    added: list[tuple[str, str]]

    @staticmethod
    def of(aug: Augmentation) -> "FencingSummary":
        return FencingSummary(aug.added_names())
