"""Implication properties checked over random and corpus structures.

Each check returns a Counter of violated property names; an empty Counter
means every property held.  Used by the property tests, the acceptance
suite and ``scripts/property_sweep.py``.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .corpus import load_corpus, shipped_corpus_path
from .es import EventStructure
from .fence import well_fenced_configurations
from .game import well_justified_configurations
from .justify import acext, is_justified
from .lang import Acq, Program, Rel, Stmt
from .logic import And, Formula, NotEq, Or, TrueF, theorem_inv_check
from .randprog import ProgramShape, random_program
from .semantics import program_semantics
from .seqcon import drf_report, pre_justified, sc_configurations

SC_WJ = "sc => wj"
PJ_SC = "pre-justified => sc"
PJ_SC_PREMISES = "pre-justified => sc (drf premises)"
ACYCLIC_WJ = "acyclic+justified => wj"
DRF = "drf theorem"
FENCED_WJ = "no locks: fenced <=> wj"
FENCED_SC = "lock-only: fenced => sc"
INVARIANT = "invariant theorem"

PROPERTIES = (SC_WJ, PJ_SC, PJ_SC_PREMISES, ACYCLIC_WJ, DRF, FENCED_WJ, FENCED_SC, INVARIANT)


def random_formula(rng: random.Random, depth: int = 2, variables: str = "xy") -> Formula:
    if depth == 0 or rng.random() < 0.4:
        return NotEq(rng.choice(variables), rng.choice((0, 1))) if rng.random() < 0.9 else TrueF()
    op = And if rng.random() < 0.5 else Or
    return op(random_formula(rng, depth - 1, variables), random_formula(rng, depth - 1, variables))


def _uses_locks(stmts: tuple[Stmt, ...]) -> bool:
    return any(isinstance(s, (Acq, Rel)) for s in stmts)


def structure_of(p: Program) -> EventStructure:
    locked = any(_uses_locks(t.stmts) for t in p.threads)
    return program_semantics(p, lock_values=[2] if locked else None)


def is_lock_only(es: EventStructure) -> bool:
    return es.alphabet.with_lock and all(es.labels[e].kind in ("init", "LA", "LR") for e in range(es.n))


def check_structure(es: EventStructure, rng: random.Random | None = None) -> Counter:
    """Every implication property on one structure."""
    rng = rng or random.Random(0)
    bad: Counter = Counter()
    wj = well_justified_configurations(es)
    sc = sc_configurations(es)
    rep = drf_report(es)
    premises = rep.read_enabled and rep.commutative and rep.premise_holds
    for c in es.configurations():
        if c in sc and c not in wj:
            bad[SC_WJ] += 1
        if pre_justified(es, c) and c not in sc:
            bad[PJ_SC] += 1
            if premises:
                bad[PJ_SC_PREMISES] += 1
        if is_justified(es, c) and acext(es, 0, c) and c not in wj:
            bad[ACYCLIC_WJ] += 1
    if rep.bug_alarm:
        bad[DRF] += 1
    if not es.alphabet.with_lock and well_fenced_configurations(es) != wj:
        bad[FENCED_WJ] += 1
    if is_lock_only(es) and not well_fenced_configurations(es) <= sc:
        bad[FENCED_SC] += 1
    if theorem_inv_check(es, random_formula(rng)).bug_alarm:
        bad[INVARIANT] += 1
    return bad


@dataclass
class SweepShape:
    """Random program mix: plain, lock-wrapped and lock-only programs.

    ``max_stmts`` counts acq/rel too, so a lock-wrapped body is two shorter.
    """

    max_threads: int = 3
    max_stmts: int = 3
    lock_share: float = 0.3
    lock_only_share: float = 0.15
    max_events: int = 40

    def draw(self, rng: random.Random) -> Program:
        roll = rng.random()
        base = dict(max_threads=self.max_threads, max_stmts=self.max_stmts)
        if roll < self.lock_only_share:
            return random_program(rng, ProgramShape(lock_only=True, **base))
        if roll < self.lock_only_share + self.lock_share:
            base["max_stmts"] = max(1, self.max_stmts - 2)
            return random_program(rng, ProgramShape(locks=True, **base))
        return random_program(rng, ProgramShape(**base))


def random_structures(rng: random.Random, count: int, shape: SweepShape | None = None) -> Iterator[tuple[Program, EventStructure]]:
    shape = shape or SweepShape()
    done = 0
    while done < count:
        p = shape.draw(rng)
        es = structure_of(p)
        if es.n > shape.max_events:
            continue
        yield p, es
        done += 1


def corpus_structures() -> list[tuple[str, EventStructure]]:
    path = shipped_corpus_path()
    return [(e.name, e.structure(path.parent)) for e in load_corpus(path.read_text())]
