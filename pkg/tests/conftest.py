from __future__ import annotations

import random
from functools import lru_cache

import pytest

from esmem import es as es_mod
from esmem.corpus import figures_dir
from esmem.es import EventStructure
from esmem.semantics import compile_program

# name -> (program text, values, lock values)
PROGRAMS = {
    "P1": ("r1=x; y=r1; || r2=y; x=r2;", (0, 1), None),
    "P2": ("r1=x; y=1; || r2=y; x=1;", (0, 1), None),
    "P3": ("r1=x; y=1; || r2=y; x=r2;", (0, 1), None),
    "P4": ("y=x; || x=1; || r=y;", (0, 1), None),
    "P5": ("acq(2); x=1; x=0; rel(2); || acq(2); r=x; rel(2);", (0, 1), (2,)),
    "P6": ("y=x; || z=1; || if(!z){x=y;} else {x=1;}", (0, 1), None),
    "TC7": ("r=z; y=x; || z=y; x=1;", (0, 1), None),
    "TC9p": ("r1=x; if(r1<2){y=1;} || x=2; || r2=y; x=r2;", (0, 1, 2), None),
    "RACE": ("w=1; || y=(w<=x); || z=(x<=w); || x=1;", (0, 1), None),
}


@lru_cache(maxsize=None)
def program(name: str) -> EventStructure:
    text, values, locks = PROGRAMS[name]
    return compile_program(text, values, lock_values=locks)


@lru_cache(maxsize=None)
def figure(name: str) -> EventStructure:
    """Hand-encoded figure structure whose event names are the figure's ids."""
    return es_mod.loads((figures_dir() / f"{name}.json").read_text())


def ids(es: EventStructure, mask: int) -> set[str]:
    return {es.names[e] for e in es_mod.bits(mask)}


def config_with(es: EventStructure, *labels: str) -> list[int]:
    """Maximal configurations containing every given label."""
    want = {es_mod.parse_action(s) for s in labels}
    return [
        c for c in es.maximal_configurations()
        if want <= {es.labels[e] for e in es_mod.bits(c)}
    ]


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)


# acceptance lines, echoed in the terminal summary so they show without -s
ACCEPTANCE: list[str] = []


def record_acceptance(criterion: str, ok: bool, detail: str = "") -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  [{criterion}] {detail}".rstrip()
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
