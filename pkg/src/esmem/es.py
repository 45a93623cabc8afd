"""Finite confusion-free labeled prime event structures over a memory alphabet.

Events are dense integers; event sets are Python ints used as bitsets. The
order is kept transitively closed as per-event masks of strict predecessors,
and conflict is stored as a partition into primitive-conflict classes from
which the full hereditary conflict is derived.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

EventRef = Union[int, str]

# ------------------------------------------------------------------ bitsets


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


# ------------------------------------------------------------------ actions

_KINDS = ("init", "R", "W", "RMW", "LA", "LR")


@dataclass(frozen=True, order=True)
class Action:
    """A memory action label.

    ``kind`` is one of ``init``, ``R`` (read), ``W`` (write), ``RMW``,
    ``LA`` (lock acquire) and ``LR`` (lock release).
    """

    kind: str
    var: str | None = None
    value: int | None = None
    new: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")

    @staticmethod
    def init() -> "Action":
        return Action("init")

    @staticmethod
    def read(var: str, value: int) -> "Action":
        return Action("R", var, value)

    @staticmethod
    def write(var: str, value: int) -> "Action":
        return Action("W", var, value)

    @staticmethod
    def rmw(var: str, old: int, new: int) -> "Action":
        return Action("RMW", var, old, new)

    @staticmethod
    def acq(value: int) -> "Action":
        return Action("LA", None, value)

    @staticmethod
    def rel(value: int) -> "Action":
        return Action("LR", None, value)

    @property
    def is_lock(self) -> bool:
        return self.kind in ("LA", "LR")

    def read_of(self) -> tuple[str, int] | None:
        """(variable, value) observed by a memory read, if any."""
        if self.kind in ("R", "RMW"):
            return (self.var, self.value)
        return None

    def write_of(self) -> tuple[str, int] | None:
        """(variable, value) produced by a memory write (init is handled apart)."""
        if self.kind == "W":
            return (self.var, self.value)
        if self.kind == "RMW":
            return (self.var, self.new)
        return None

    def touched(self) -> list[tuple[str, int]]:
        """Variable/value pairs a formula atom can observe."""
        if self.kind in ("R", "W"):
            return [(self.var, self.value)]
        if self.kind == "RMW":
            return [(self.var, self.value), (self.var, self.new)]
        return []

    def __str__(self) -> str:
        if self.kind == "init":
            return "init"
        if self.kind in ("R", "W"):
            return f"{self.kind} {self.var} {self.value}"
        if self.kind == "RMW":
            return f"RMW {self.var} {self.value} {self.new}"
        return f"{self.kind} {self.value}"


def parse_action(text: str) -> Action:
    parts = text.split()
    if not parts:
        raise ValueError("empty action label")
    kind = parts[0]
    try:
        if kind == "init" and len(parts) == 1:
            return Action.init()
        if kind in ("R", "W") and len(parts) == 3:
            return Action(kind, parts[1], int(parts[2]))
        if kind == "RMW" and len(parts) == 4:
            return Action.rmw(parts[1], int(parts[2]), int(parts[3]))
        if kind in ("LA", "LR") and len(parts) == 2:
            return Action(kind, None, int(parts[1]))
    except ValueError:
        pass
    raise ValueError(f"malformed action label {text!r}")


# ----------------------------------------------------------------- alphabet


@dataclass(frozen=True)
class Alphabet:
    """The memory alphabet with its justification relations.

    A write of ``x=v`` (plain write, or the new value of an RMW; init writes 0
    to every variable) justifies a read of ``x=v`` (plain read, or the old
    value of an RMW). With locks, init justifies acquires, acquires justify
    releases and releases justify acquires of the same lock value; those lock
    pairs form the synchronising relation.
    """

    variables: frozenset[str]
    values: frozenset[int]
    with_lock: bool = False
    lock_values: frozenset[int] = frozenset()
    rmw: bool = False
    init_lock_zero_only: bool = False

    def is_read(self, a: Action) -> bool:
        return a.kind in ("R", "RMW", "LA", "LR")

    def is_write(self, a: Action) -> bool:
        return a.kind in ("init", "W", "RMW", "LA", "LR")

    def justifies(self, a: Action, b: Action) -> bool:
        """Membership of (a, b) in the justification relation."""
        if b.is_lock or (a.is_lock and b.kind != "init"):
            return self.sync(a, b)
        r = b.read_of()
        if r is None:
            return False
        if a.kind == "init":
            return r[1] == 0
        return a.write_of() == r

    def sync(self, a: Action, b: Action) -> bool:
        """Membership of (a, b) in the synchronising relation (lock pairs only)."""
        if not self.with_lock or not b.is_lock:
            return False
        if a.kind == "init":
            return b.kind == "LA" and (b.value == 0 or not self.init_lock_zero_only)
        if a.kind == "LA":
            return b.kind == "LR" and a.value == b.value
        if a.kind == "LR":
            return b.kind == "LA" and a.value == b.value
        return False

    def contains(self, a: Action) -> bool:
        if a.kind == "init":
            return True
        if a.is_lock:
            return self.with_lock and a.value in self.lock_values
        if a.var not in self.variables or a.value not in self.values:
            return False
        if a.kind == "RMW":
            return self.rmw and a.new in self.values
        return True

    def actions(self) -> list[Action]:
        """The whole (finite) label set, in a fixed order."""
        out = [Action.init()]
        vals = sorted(self.values)
        for x in sorted(self.variables):
            out += [Action.read(x, v) for v in vals]
            out += [Action.write(x, v) for v in vals]
            if self.rmw:
                out += [Action.rmw(x, o, n) for o in vals for n in vals]
        if self.with_lock:
            for v in sorted(self.lock_values):
                out += [Action.acq(v), Action.rel(v)]
        return out


def default_alphabet(
    variables: Iterable[str],
    values: Iterable[int],
    with_lock: bool = False,
    *,
    lock_values: Iterable[int] | None = None,
    rmw: bool = False,
    init_lock_zero_only: bool = False,
) -> Alphabet:
    vals = frozenset(values)
    if 0 not in vals:
        raise ValueError("the value set must contain 0")
    locks = frozenset(vals if lock_values is None else lock_values) if with_lock else frozenset()
    return Alphabet(frozenset(variables), vals, with_lock, locks, rmw, init_lock_zero_only)


# ----------------------------------------------------------- event structure


class EventStructure:
    """Immutable finite event structure with bitset-encoded relations.

    ``below[e]`` is the mask of strict causal predecessors of ``e`` (already
    transitively closed) and ``classes`` partitions the events into
    primitive-conflict classes.
    """

    __slots__ = (
        "labels", "names", "alphabet", "below", "classes",
        "down", "up", "cls", "conf", "_index", "_cache",
    )

    def __init__(
        self,
        labels: Sequence[Action],
        below: Sequence[int],
        classes: Iterable[Iterable[int]],
        alphabet: Alphabet,
        names: Sequence[str] | None = None,
    ) -> None:
        n = len(labels)
        self.labels: tuple[Action, ...] = tuple(labels)
        self.alphabet = alphabet
        if names is None or len(set(names)) != n:
            names = [str(i) for i in range(n)]
        self.names: tuple[str, ...] = tuple(names)
        self._index = {nm: i for i, nm in enumerate(self.names)}
        self.below: tuple[int, ...] = tuple(below)
        cls = [0] * n
        seen = 0
        norm: list[int] = []
        for group in classes:
            m = 0
            for e in group:
                m |= 1 << e
            if not m:
                continue
            if m & seen:
                raise ValueError("primitive-conflict classes overlap")
            seen |= m
            norm.append(m)
        for e in range(n):
            if not seen >> e & 1:
                norm.append(1 << e)
        for m in norm:
            for e in bits(m):
                if e >= n:
                    raise ValueError(f"class member {e} out of range")
                cls[e] = m
        self.classes: tuple[int, ...] = tuple(sorted(norm, key=lambda m: (m & -m)))
        self.cls: tuple[int, ...] = tuple(cls)
        self.down = tuple(self.below[e] | 1 << e for e in range(n))
        up = [1 << e for e in range(n)]
        for e in range(n):
            for d in bits(self.below[e]):
                up[d] |= 1 << e
        self.up: tuple[int, ...] = tuple(up)
        conf = []
        for e in range(n):
            m = 0
            for b in bits(self.down[e]):
                for s in bits(self.cls[b] & ~(1 << b)):
                    m |= self.up[s]
            conf.append(m)
        self.conf: tuple[int, ...] = tuple(conf)
        self._cache: dict = {}

    # -- basic access
    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def all_mask(self) -> int:
        return (1 << self.n) - 1

    def ev(self, ref: EventRef) -> int:
        if isinstance(ref, str):
            try:
                return self._index[ref]
            except KeyError:
                raise KeyError(f"unknown event {ref!r}") from None
        if not 0 <= ref < self.n:
            raise KeyError(f"unknown event {ref!r}")
        return ref

    def mask(self, events: Iterable[EventRef] | int) -> int:
        if isinstance(events, int):
            return events
        m = 0
        for r in events:
            m |= 1 << self.ev(r)
        return m

    def names_of(self, mask: int) -> list[str]:
        return [self.names[e] for e in bits(mask)]

    def label(self, e: EventRef) -> Action:
        return self.labels[self.ev(e)]

    def cached(self, key, build):
        """Per-structure memo for derived tables."""
        try:
            return self._cache[key]
        except KeyError:
            val = self._cache[key] = build()
            return val

    @property
    def read_mask(self) -> int:
        return self.cached("reads", lambda: self._mask_where(self.alphabet.is_read))

    @property
    def write_mask(self) -> int:
        return self.cached("writes", lambda: self._mask_where(self.alphabet.is_write))

    def _mask_where(self, pred) -> int:
        m = 0
        for e, a in enumerate(self.labels):
            if pred(a):
                m |= 1 << e
        return m

    # -- relations
    def leq(self, d: EventRef, e: EventRef) -> bool:
        return bool(self.down[self.ev(e)] >> self.ev(d) & 1)

    def lt(self, d: EventRef, e: EventRef) -> bool:
        return bool(self.below[self.ev(e)] >> self.ev(d) & 1)

    def conflicts(self, d: EventRef, e: EventRef) -> bool:
        return bool(self.conf[self.ev(d)] >> self.ev(e) & 1)

    def concurrent(self, d: EventRef, e: EventRef) -> bool:
        d, e = self.ev(d), self.ev(e)
        return d != e and not (self.leq(d, e) or self.leq(e, d) or self.conflicts(d, e))

    def covers(self, e: int) -> int:
        """Immediate predecessors of ``e``."""
        m = self.below[e]
        for b in bits(self.below[e]):
            m &= ~self.below[b]
        return m

    def order_pairs(self) -> list[tuple[int, int]]:
        return [(d, e) for e in range(self.n) for d in bits(self.below[e])]

    def roots(self) -> int:
        return sum(1 << e for e in range(self.n) if not self.below[e])

    # -- configurations
    def is_configuration(self, c: int) -> bool:
        for e in bits(c):
            if self.below[e] & ~c or self.conf[e] & c:
                return False
        return True

    def enabled(self, c: int) -> int:
        """Events whose addition to configuration ``c`` yields a configuration."""
        m = 0
        for e in bits(self.all_mask & ~c):
            if not self.below[e] & ~c and not self.conf[e] & c:
                m |= 1 << e
        return m

    def configurations(self) -> Iterator[int]:
        seen = {0}
        stack = [0]
        while stack:
            c = stack.pop()
            yield c
            for e in bits(self.enabled(c)):
                d = c | 1 << e
                if d not in seen:
                    seen.add(d)
                    stack.append(d)

    def maximal_configurations(self) -> list[int]:
        return self.cached("maximal", lambda: sorted(c for c in self.configurations() if not self.enabled(c)))

    def __repr__(self) -> str:
        return f"EventStructure(n={self.n})"


# ------------------------------------------------------------ module helpers


def primitive_class(es: EventStructure, e: EventRef) -> frozenset[int]:
    return frozenset(bits(es.cls[es.ev(e)]))


def conflicts(es: EventStructure, d: EventRef, e: EventRef) -> bool:
    return es.conflicts(d, e)


def concurrent(es: EventStructure, d: EventRef, e: EventRef) -> bool:
    return es.concurrent(d, e)


def is_configuration(es: EventStructure, c: Iterable[EventRef] | int) -> bool:
    return es.is_configuration(es.mask(c))


def configurations(es: EventStructure) -> Iterator[int]:
    return es.configurations()


def maximal_configurations(es: EventStructure) -> list[int]:
    return es.maximal_configurations()


def transitive_closure(n: int, pairs: Iterable[tuple[int, int]]) -> list[int]:
    """Strict-predecessor masks of the transitive closure of ``pairs``."""
    below = [0] * n
    for d, e in pairs:
        below[e] |= 1 << d
    for k in range(n):
        bk = below[k]
        kb = 1 << k
        for i in range(n):
            if below[i] & kb:
                below[i] |= bk
    return below


def from_pairs(
    labels: Sequence[Action],
    pairs: Iterable[tuple[int, int]],
    classes: Iterable[Iterable[int]],
    alphabet: Alphabet,
    names: Sequence[str] | None = None,
) -> EventStructure:
    return EventStructure(labels, transitive_closure(len(labels), pairs), classes, alphabet, names)


# --------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    law: str
    events: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.law}: {', '.join(self.events)}"


def validate(es: EventStructure) -> list[Violation]:
    """Check partial order, confusion-freeness and irreflexive conflict."""
    out: list[Violation] = []
    nm = es.names
    for e in range(es.n):
        if es.below[e] >> e & 1:
            out.append(Violation("order cycle", (nm[e],)))
        if not es.alphabet.contains(es.labels[e]):
            out.append(Violation("label outside alphabet", (nm[e],)))
    for m in es.classes:
        mem = list(bits(m))
        for i, a in enumerate(mem):
            for b in mem[i + 1:]:
                if es.down[b] >> a & 1 or es.down[a] >> b & 1:
                    out.append(Violation("ordered siblings", (nm[a], nm[b])))
                elif es.below[a] != es.below[b]:
                    out.append(Violation("siblings with different predecessors", (nm[a], nm[b])))
    for e in range(es.n):
        if es.conf[e] >> e & 1:
            out.append(Violation("self-conflict", (nm[e],)))
    return out


# -------------------------------------------------------------- combinators


def empty(alphabet: Alphabet) -> EventStructure:
    return EventStructure((), (), (), alphabet, ())


def _shift_classes(es: EventStructure, k: int) -> list[int]:
    return [m << k for m in es.classes]


def _merge_names(*groups: Sequence[str]) -> list[str] | None:
    out = [n for g in groups for n in g]
    return out if len(set(out)) == len(out) else None


def _check_same(a: EventStructure, b: EventStructure) -> None:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")


def _mask_classes(masks: Iterable[int]) -> list[list[int]]:
    return [list(bits(m)) for m in masks]


def prefix(action: Action, es: EventStructure, name: str | None = None) -> EventStructure:
    """New event labelled ``action`` placed below every event of ``es``."""
    labels = (action,) + es.labels
    below = [0] + [(b << 1) | 1 for b in es.below]
    classes = [[0]] + _mask_classes(_shift_classes(es, 1))
    names = _merge_names([name or f"e{es.n}"], es.names) if name is not None else None
    return EventStructure(labels, below, classes, es.alphabet, names)


def _root_class(es: EventStructure) -> int:
    roots = es.roots()
    if not roots:
        return 0
    c = es.cls[(roots & -roots).bit_length() - 1]
    if c != roots:
        raise ValueError("sum operand has roots outside a single primitive-conflict class")
    return c


def sum_(es1: EventStructure, es2: EventStructure) -> EventStructure:
    """Choice: every event of one side conflicts with every event of the other."""
    _check_same(es1, es2)
    k = es1.n
    r1, r2 = _root_class(es1), _root_class(es2) << k
    classes = [m for m in es1.classes if m != r1] + [m for m in _shift_classes(es2, k) if m != r2]
    if r1 | r2:
        classes.append(r1 | r2)
    below = list(es1.below) + [b << k for b in es2.below]
    return EventStructure(
        es1.labels + es2.labels, below, _mask_classes(classes), es1.alphabet,
        _merge_names(es1.names, es2.names),
    )


def par(es1: EventStructure, es2: EventStructure) -> EventStructure:
    """Parallel composition: disjoint union with no extra order or conflict."""
    _check_same(es1, es2)
    k = es1.n
    below = list(es1.below) + [b << k for b in es2.below]
    classes = list(es1.classes) + _shift_classes(es2, k)
    return EventStructure(
        es1.labels + es2.labels, below, _mask_classes(classes), es1.alphabet,
        _merge_names(es1.names, es2.names),
    )


# ------------------------------------------------------------- augmentation


class AugmentationError(ValueError):
    pass


@dataclass(frozen=True)
class Augmentation:
    base: EventStructure
    added: frozenset[tuple[int, int]]
    es: EventStructure

    def added_names(self) -> list[tuple[str, str]]:
        nm = self.base.names
        return sorted((nm[d], nm[e]) for d, e in self.added)


def with_order(es: EventStructure, below: Sequence[int]) -> EventStructure:
    """Same events, labels and partition; new (closed) order."""
    return EventStructure(es.labels, below, _mask_classes(es.classes), es.alphabet, es.names)


def augment(es: EventStructure, extra: Iterable[tuple[EventRef, EventRef]]) -> Augmentation:
    """Add order pairs, close transitively and re-validate.

    The primitive-conflict partition and labels are kept, and full conflict is
    re-derived from the larger order, so it can only grow.
    """
    pairs = frozenset((es.ev(d), es.ev(e)) for d, e in extra)
    new = [p for p in pairs if not es.leq(*p)]
    if not new:
        return Augmentation(es, pairs, es)
    below = list(es.below)
    for d, e in new:
        below[e] |= es.down[d]
    below = transitive_closure(es.n, [(d, e) for e in range(es.n) for d in bits(below[e])])
    aug = with_order(es, below)
    problems = validate(aug)
    if problems:
        raise AugmentationError("; ".join(map(str, problems)))
    return Augmentation(es, pairs, aug)


def orient(es: EventStructure, d: EventRef, e: EventRef) -> frozenset[tuple[int, int]]:
    """Pairs placing ``d`` before ``e`` and before every primitive sibling of ``e``.

    Siblings must keep equal predecessors, so ordering ``d`` before ``e`` alone
    never yields a valid augmentation when ``e`` has siblings.
    """
    d, e = es.ev(d), es.ev(e)
    return frozenset((d, s) for s in bits(es.cls[e]))


# -------------------------------------------------------------- isomorphism


def find_isomorphism(a: EventStructure, b: EventStructure) -> dict[int, int] | None:
    """Label-, order- and partition-preserving bijection from ``a`` to ``b``."""
    if a.n != b.n:
        return None

    def sig(es: EventStructure, e: int):
        return (es.labels[e], popcount(es.below[e]), popcount(es.up[e]), popcount(es.cls[e]), popcount(es.conf[e]))

    sa = [sig(a, e) for e in range(a.n)]
    sb = [sig(b, e) for e in range(b.n)]
    if sorted(sa) != sorted(sb):
        return None
    order = sorted(range(a.n), key=lambda e: (popcount(a.below[e]), e))
    m: dict[int, int] = {}
    used = 0

    def ok(x: int, y: int) -> bool:
        for x2, y2 in m.items():
            if bool(a.below[x] >> x2 & 1) != bool(b.below[y] >> y2 & 1):
                return False
            if bool(a.below[x2] >> x & 1) != bool(b.below[y2] >> y & 1):
                return False
            if bool(a.cls[x] >> x2 & 1) != bool(b.cls[y] >> y2 & 1):
                return False
        return True

    def go(i: int) -> bool:
        nonlocal used
        if i == len(order):
            return True
        x = order[i]
        for y in range(b.n):
            if used >> y & 1 or sb[y] != sa[x] or not ok(x, y):
                continue
            m[x] = y
            used |= 1 << y
            if go(i + 1):
                return True
            del m[x]
            used &= ~(1 << y)
        return False

    return dict(m) if go(0) else None


def isomorphic(a: EventStructure, b: EventStructure) -> bool:
    return find_isomorphism(a, b) is not None


# ----------------------------------------------------------------------- JSON


def to_json(es: EventStructure) -> dict:
    nm = es.names
    obj = {
        "values": sorted(es.alphabet.values),
        "events": [{"id": nm[e], "label": str(es.labels[e])} for e in range(es.n)],
        "order": [[nm[d], nm[e]] for e in range(es.n) for d in bits(es.covers(e))],
        "primitive_classes": [es.names_of(m) for m in es.classes if popcount(m) > 1],
    }
    if es.alphabet.with_lock:
        obj["lock_values"] = sorted(es.alphabet.lock_values)
    return obj


def dumps(es: EventStructure) -> str:
    return json.dumps(to_json(es), indent=2)


def from_json(obj: dict, alphabet: Alphabet | None = None) -> EventStructure:
    """Build and validate an event structure from its JSON form."""
    events = obj.get("events")
    if not isinstance(events, list):
        raise ValueError("ES JSON needs an 'events' list")
    names = [str(ev["id"]) for ev in events]
    if len(set(names)) != len(names):
        raise ValueError("duplicate event ids")
    labels = [parse_action(ev["label"]) for ev in events]
    idx = {n: i for i, n in enumerate(names)}

    def look(n) -> int:
        try:
            return idx[str(n)]
        except KeyError:
            raise ValueError(f"unknown event {n!r}") from None

    pairs = [(look(d), look(e)) for d, e in obj.get("order", [])]
    classes = [[look(x) for x in grp] for grp in obj.get("primitive_classes", [])]
    if alphabet is None:
        values = set(obj.get("values", [0, 1]))
        for a in labels:
            if not a.is_lock:
                values.update(v for _, v in a.touched())
        locks = [a.value for a in labels if a.is_lock]
        with_lock = bool(locks) or "lock_values" in obj
        alphabet = default_alphabet(
            {a.var for a in labels if a.var is not None},
            values,
            with_lock,
            lock_values=obj.get("lock_values", locks) if with_lock else None,
            rmw=any(a.kind == "RMW" for a in labels),
        )
    es = from_pairs(labels, pairs, classes, alphabet, names)
    problems = validate(es)
    if problems:
        raise ValueError("invalid event structure: " + "; ".join(map(str, problems)))
    return es


def loads(text: str, alphabet: Alphabet | None = None) -> EventStructure:
    return from_json(json.loads(text), alphabet)


_NAME_RE = re.compile(r"init\Z|t\d+\[[0-9,\-]*\]\.\d+\Z")


def is_canonical_name(name: str) -> bool:
    return bool(_NAME_RE.match(name))
