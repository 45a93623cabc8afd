"""Event-level and configuration-level justification, and acyclic extension.

Acyclic extension is decomposed into single-event steps. The opponent side of
the justification game only ever needs the saturated end points of such step
sequences, which ``StepSystem`` explores with memoisation on bitset states.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Callable, Iterable

from .es import EventRef, EventStructure, bits

DEFAULT_MEMO_SIZE = 1 << 20


class LRUMemo:
    """Bounded LRU map guarded by a lock (values are computed outside it)."""

    def __init__(self, maxsize: int = DEFAULT_MEMO_SIZE) -> None:
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key, default=None):
        with self._lock:
            try:
                self._data.move_to_end(key)
                return self._data[key]
            except KeyError:
                return default

    def put(self, key, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def __len__(self) -> int:
        return len(self._data)


# ------------------------------------------------------------ event level


def event_justifies(es: EventStructure, d: EventRef, e: EventRef) -> bool:
    """The four justification conditions, checked literally.

    An event never justifies itself; only an RMW carries a label related to
    itself by J, and reading its own write would be a causal loop.
    """
    d, e = es.ev(d), es.ev(e)
    J = es.alphabet.justifies
    lab = es.labels
    if d == e or not J(lab[d], lab[e]):
        return False
    if es.lt(e, d) or es.conflicts(d, e):
        return False
    above_d = es.up[d] & ~(1 << d)
    for c in bits(es.cls[e]):
        for b in bits(above_d & es.below[c]):
            if J(lab[b], lab[c]):
                return False
    return True


def justifier_masks(es: EventStructure) -> tuple[int, ...]:
    """For each event, the mask of events that justify it."""

    def build() -> tuple[int, ...]:
        out = [0] * es.n
        for e in bits(es.read_mask):
            for d in bits(es.write_mask):
                if event_justifies(es, d, e):
                    out[e] |= 1 << d
        return tuple(out)

    return es.cached("justifiers", build)


def config_justifies(es: EventStructure, c: int | Iterable[EventRef], d: int | Iterable[EventRef]) -> bool:
    """Every read of ``d`` outside ``c`` has a justifier inside ``c``."""
    c, d = es.mask(c), es.mask(d)
    jm = justifier_masks(es)
    return all(jm[r] & c for r in bits(d & ~c & es.read_mask))


def is_justified(es: EventStructure, c: int | Iterable[EventRef]) -> bool:
    c = es.mask(c)
    if not es.is_configuration(c):
        raise ValueError("not a configuration")
    jm = justifier_masks(es)
    return all(jm[r] & c for r in bits(c & es.read_mask))


def unjustified_reads(es: EventStructure, c: int) -> int:
    jm = justifier_masks(es)
    return sum(1 << r for r in bits(c & es.read_mask) if not jm[r] & c)


def ok_mask(es: EventStructure, m: int) -> int:
    """Events whose membership in a target is justified by ``m``."""
    jm = justifier_masks(es)
    out = m | (es.all_mask & ~es.read_mask)
    for r in bits(es.read_mask & ~m):
        if jm[r] & m:
            out |= 1 << r
    return out


# ------------------------------------------------------ acyclic extension


def acext_step(es: EventStructure, c: int | Iterable[EventRef]) -> int:
    """Events addable to configuration ``c`` in one acyclic step."""
    c = es.mask(c)
    jm = justifier_masks(es)
    reads = es.read_mask
    out = 0
    for e in bits(es.enabled(c)):
        if not reads >> e & 1 or jm[e] & c:
            out |= 1 << e
    return out


def acext(es: EventStructure, c: int | Iterable[EventRef], d: int | Iterable[EventRef]) -> bool:
    """Whether ``d`` is reachable from ``c`` by acyclic extension."""
    c, d = es.mask(c), es.mask(d)
    if c & ~d:
        return False
    s = c
    while s != d:
        add = acext_step(es, s) & d
        if not add:
            return False
        s |= add
    return True


class StepSystem:
    """Opponent moves from a state: single-event steps with forced closure.

    ``step`` returns the events addable to a state. Events whose
    primitive-conflict class is a singleton are added eagerly, since every
    saturated end point contains them anyway.
    """

    def __init__(self, es: EventStructure, step: Callable[[int], int], memo_size: int = DEFAULT_MEMO_SIZE) -> None:
        self.es = es
        self.step = step
        self.singletons = sum(1 << e for e in range(es.n) if es.cls[e] == 1 << e)
        self._ok = LRUMemo(memo_size)
        self._sat = LRUMemo(memo_size)

    def closure(self, s: int) -> int:
        while True:
            add = self.step(s) & self.singletons
            if not add:
                return s
            s |= add

    def ok(self, s: int) -> int:
        """Intersection of ``ok_mask`` over every saturated state reachable from ``s``."""
        s = self.closure(s)
        hit = self._ok.get(s)
        if hit is not None:
            return hit
        moves = self.step(s)
        if not moves:
            res = ok_mask(self.es, s)
        else:
            floor = s | (self.es.all_mask & ~self.es.read_mask)
            res = self.es.all_mask
            for e in bits(moves):
                res &= self.ok(s | 1 << e)
                if res == floor:
                    break
        self._ok.put(s, res)
        return res

    def saturated(self, s: int) -> frozenset[int]:
        s = self.closure(s)
        hit = self._sat.get(s)
        if hit is not None:
            return hit
        moves = self.step(s)
        if not moves:
            res = frozenset((s,))
        else:
            acc: set[int] = set()
            for e in bits(moves):
                acc |= self.saturated(s | 1 << e)
            res = frozenset(acc)
        self._sat.put(s, res)
        return res


def config_system(es: EventStructure) -> StepSystem:
    return es.cached("config_system", lambda: StepSystem(es, lambda s: acext_step(es, s)))


def saturated_reachable(es: EventStructure, c: int | Iterable[EventRef]) -> frozenset[int]:
    """All configurations reachable from ``c`` by acyclic steps that admit none."""
    c = es.mask(c)
    if not es.is_configuration(c):
        raise ValueError("not a configuration")
    return config_system(es).saturated(c)
