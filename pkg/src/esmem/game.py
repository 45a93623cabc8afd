"""The always-eventually justification game and well-justified configurations.

The opponent extends a configuration acyclically; the player wins a round
towards a target when every saturated extension justifies the target.
``StepSystem.ok`` computes the largest such target in one sweep, which turns
each round into a bitset inclusion test.

The alternative mode ranges over consistent sets (no primitive-conflict pair,
down-closure dropped). Its step rule is: a writing event needs the reads
causally below it, and a reading event needs a justifier already present.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .es import EventRef, EventStructure, bits, popcount
from .justify import StepSystem, acext, config_system, is_justified, justifier_masks

MODES = ("wj", "acyclic", "justified", "sc", "fenced", "alt")
MODE_ALIASES = {
    "well-justified": "wj",
    "well_justified": "wj",
    "acyclically-justified": "acyclic",
    "alt-well-justified": "alt",
    "well-fenced": "fenced",
}

MAX_TRACE_SATURATED = 16


def normalize_mode(mode: str) -> str:
    m = MODE_ALIASES.get(mode, mode)
    if m not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    return m


# --------------------------------------------------------------------- trace


@dataclass
class TraceStep:
    source: list[str]
    target: list[str]
    saturated: list[list[str]]
    saturated_total: int
    justifiers: dict[str, list[str]] = field(default_factory=dict)


@dataclass
class GameTrace:
    """A winning chain from the empty set, with per-round evidence.

    ``justifiers`` maps each new read of a round to one justifier per listed
    saturated opponent position (in the same order as ``saturated``).
    """

    mode: str
    chain: list[list[str]]
    steps: list[TraceStep]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "chain": self.chain,
            "steps": [
                {
                    "from": s.source,
                    "to": s.target,
                    "saturated": s.saturated,
                    "saturated_total": s.saturated_total,
                    "justifiers": s.justifiers,
                }
                for s in self.steps
            ],
        }


def _make_trace(es: EventStructure, system: StepSystem, chain: list[int], mode: str) -> GameTrace:
    jm = justifier_masks(es)
    steps = []
    for a, b in zip(chain, chain[1:]):
        sats = sorted(system.saturated(a), key=lambda m: (popcount(m), m))
        shown = sats[:MAX_TRACE_SATURATED]
        just: dict[str, list[str]] = {}
        for r in bits((b & ~a) & es.read_mask):
            row = []
            for m in shown:
                w = jm[r] & m
                row.append(es.names[(w & -w).bit_length() - 1] if w else "?")
            just[es.names[r]] = row
        steps.append(TraceStep(es.names_of(a), es.names_of(b), [es.names_of(m) for m in shown], len(sats), just))
    return GameTrace(mode, [es.names_of(c) for c in chain], steps)


# ---------------------------------------------------------- configurations


def ae_justifies(es: EventStructure, c: int | Iterable[EventRef], d: int | Iterable[EventRef]) -> bool:
    """Every acyclic extension of ``c`` can be extended further to justify ``d``."""
    c, d = es.mask(c), es.mask(d)
    return not d & ~config_system(es).ok(c)


def _interval(es: EventStructure, lo: int, hi: int) -> Iterator[int]:
    """Configurations between ``lo`` and ``hi`` (both inclusive), largest first."""
    top = lo
    while True:
        add = es.enabled(top) & hi
        if not add:
            break
        top |= add & -add
    seen = {top}
    yield top
    stack = [lo]
    while stack:
        s = stack.pop()
        if s not in seen:
            seen.add(s)
            yield s
        for e in bits(es.enabled(s) & hi & ~s):
            t = s | 1 << e
            if t not in seen:
                stack.append(t)


def _targets(es: EventStructure, s: int, universe: int) -> Iterator[int]:
    hi = s | (config_system(es).ok(s) & universe)
    for d in _interval(es, s, hi):
        if d != s:
            yield d


def well_justified(es: EventStructure, c: int | Iterable[EventRef], *, explain: bool = False) -> tuple[bool, GameTrace | None]:
    """Justified and reachable from the empty set by winning rounds."""
    c = es.mask(c)
    if not is_justified(es, c):
        return False, None
    parent: dict[int, int | None] = {0: None}
    stack = [0]
    found = c == 0
    while stack and not found:
        s = stack.pop()
        for d in _targets(es, s, c):
            if d in parent:
                continue
            parent[d] = s
            if d == c:
                found = True
                break
            stack.append(d)
    if not found:
        return False, None
    if not explain:
        return True, None
    chain = [c]
    while parent[chain[-1]] is not None:
        chain.append(parent[chain[-1]])
    chain.reverse()
    return True, _make_trace(es, config_system(es), chain, "wj")


def reachable_configurations(es: EventStructure) -> frozenset[int]:
    """Every configuration reachable from the empty set by winning rounds."""

    def build() -> frozenset[int]:
        reach = {0}
        todo = deque([0])
        while todo:
            s = todo.popleft()
            for d in _targets(es, s, es.all_mask):
                if d not in reach:
                    reach.add(d)
                    todo.append(d)
        return frozenset(reach)

    return es.cached("ae_reach", build)


def well_justified_configurations(es: EventStructure) -> frozenset[int]:
    return frozenset(c for c in reachable_configurations(es) if is_justified(es, c))


# ----------------------------------------------------------------- alt mode


def is_consistent(es: EventStructure, s: int) -> bool:
    return all(not es.cls[e] & s & ~(1 << e) for e in bits(s))


def alt_step(es: EventStructure, s: int | Iterable[EventRef]) -> int:
    """Events addable to a consistent set in one alternative-mode step."""
    s = es.mask(s)
    jm = justifier_masks(es)
    reads, writes = es.read_mask, es.write_mask
    out = 0
    for e in bits(es.all_mask & ~s):
        if es.cls[e] & s:
            continue
        if writes >> e & 1 and es.below[e] & reads & ~s:
            continue
        if reads >> e & 1 and not jm[e] & s:
            continue
        out |= 1 << e
    return out


def alt_system(es: EventStructure) -> StepSystem:
    return es.cached("alt_system", lambda: StepSystem(es, lambda s: alt_step(es, s)))


def alt_saturated_reachable(es: EventStructure, s: int | Iterable[EventRef]) -> frozenset[int]:
    return alt_system(es).saturated(es.mask(s))


def alt_reach(es: EventStructure, s: int | Iterable[EventRef], d: int | Iterable[EventRef]) -> bool:
    """Whether ``d`` is reachable from ``s`` by alternative-mode steps."""
    s, d = es.mask(s), es.mask(d)
    if s & ~d:
        return False
    while s != d:
        add = alt_step(es, s) & d
        if not add:
            return False
        s |= add
    return True


def alt_ae_justifies(es: EventStructure, s: int | Iterable[EventRef], d: int | Iterable[EventRef]) -> bool:
    s, d = es.mask(s), es.mask(d)
    return not d & ~alt_system(es).ok(s)


def _write_closed(es: EventStructure, s: int) -> bool:
    reads = es.read_mask
    return all(not es.below[e] & reads & ~s for e in bits(s & es.write_mask))


def _prune_to_write_closed(es: EventStructure, s: int) -> int:
    while True:
        bad = 0
        for e in bits(s & es.write_mask):
            if es.below[e] & es.read_mask & ~s:
                bad |= 1 << e
        if not bad:
            return s
        s &= ~bad


def alt_well_justified(es: EventStructure, c: int | Iterable[EventRef], *, explain: bool = False) -> tuple[bool, GameTrace | None]:
    """Justified and contained in a consistent set reachable by winning rounds.

    The chain search takes single-event rounds (target events first) plus one
    jump per state to the largest admissible subset of the target.
    """
    c = es.mask(c)
    if not is_justified(es, c):
        return False, None
    system = alt_system(es)
    reads, writes = es.read_mask, es.write_mask
    parent: dict[int, int | None] = {0: None}
    stack = [0]
    goal = None if c else 0
    while stack and goal is None:
        s = stack.pop()
        ok = system.ok(s)
        cands = []
        jump = _prune_to_write_closed(es, s | (ok & c))
        if jump != s and is_consistent(es, jump):
            cands.append(jump)
        singles = []
        for e in bits(ok & ~s):
            if es.cls[e] & s:
                continue
            if writes >> e & 1 and es.below[e] & reads & ~s:
                continue
            singles.append(e)
        singles.sort(key=lambda e: (not c >> e & 1, e))
        cands += [s | 1 << e for e in singles]
        # stack is LIFO: push in reverse preference order
        for d in reversed(cands):
            if d in parent:
                continue
            parent[d] = s
            if not c & ~d:
                goal = d
                break
            stack.append(d)
    if goal is None:
        return False, None
    if not explain:
        return True, None
    chain = [goal]
    while parent[chain[-1]] is not None:
        chain.append(parent[chain[-1]])
    chain.reverse()
    return True, _make_trace(es, system, chain, "alt")


# ------------------------------------------------------------------ verdicts


def predicate(es: EventStructure, mode: str):
    """A per-configuration decision procedure for ``mode``."""
    mode = normalize_mode(mode)
    if mode == "wj":
        return lambda c: well_justified(es, c)[0]
    if mode == "justified":
        return lambda c: is_justified(es, c)
    if mode == "acyclic":
        return lambda c: acext(es, 0, c)
    if mode == "alt":
        return lambda c: alt_well_justified(es, c)[0]
    if mode == "sc":
        from .seqcon import sc_check

        return lambda c: sc_check(es, c)[0]
    from .fence import well_fenced

    return lambda c: well_fenced(es, c)[0]


def enumerate_verdicts(es: EventStructure, mode: str, configs: Iterable[int] | None = None) -> dict[int, bool]:
    """Verdict for every maximal configuration (or the given ones)."""
    mode = normalize_mode(mode)
    targets = es.maximal_configurations() if configs is None else list(configs)
    if mode == "wj":
        reach = reachable_configurations(es)
        return {c: c in reach and is_justified(es, c) for c in targets}
    if mode == "sc":
        from .seqcon import sc_configurations

        good = sc_configurations(es)
        return {c: c in good for c in targets}
    if mode == "fenced":
        from .fence import well_fenced_configurations

        good = well_fenced_configurations(es)
        return {c: c in good for c in targets}
    pred = predicate(es, mode)
    return {c: pred(c) for c in targets}
