"""Litmus-style corpus entries, behavior verdicts and the corpus runner."""

from __future__ import annotations

import json
import signal
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import yaml

from . import es as es_mod
from .es import EventStructure, bits
from .game import MODES, enumerate_verdicts, normalize_mode, predicate, well_justified_configurations
from .logic import CapacityError
from .query import Query, check_alphabet, holds, parse_query
from .semantics import CasPolicy, compile_program

EXPECTATIONS = ("allowed", "forbidden", "unspecified")
DEFAULT_TIMEOUT = 60.0
MAX_EVENTS = 64


class CorpusError(ValueError):
    pass


class EntryTimeout(Exception):
    pass


# ------------------------------------------------------------------- loading


def parse_values(spec: str | Iterable[int] | None, default: tuple[int, ...] = (0, 1)) -> tuple[int, ...]:
    """``"0..2"``, ``"0,1,2"`` or a list of ints."""
    if spec is None:
        return default
    if not isinstance(spec, str):
        return tuple(sorted({int(v) for v in spec}))
    spec = spec.strip()
    try:
        if ".." in spec:
            lo, hi = spec.split("..", 1)
            vals = range(int(lo), int(hi) + 1)
        else:
            vals = [int(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise CorpusError(f"bad value set {spec!r}") from exc
    out = tuple(sorted(set(vals)))
    if not out:
        raise CorpusError(f"empty value set {spec!r}")
    return out


def load_structure(
    path: str | Path,
    values: Iterable[int] = (0, 1),
    *,
    lock_values: Iterable[int] | None = None,
    cas_policy: CasPolicy = "read-write",
) -> EventStructure:
    """A program text file, or a ``.json`` event structure."""
    text = Path(path).read_text() if str(path) != "-" else sys.stdin.read()
    if str(path).endswith(".json"):
        return es_mod.loads(text)
    return compile_program(text, values, lock_values=lock_values, cas_policy=cas_policy)


@dataclass
class CorpusEntry:
    name: str
    query: str
    expect: dict[str, str]
    program: str | None = None
    es_json: str | None = None
    values: tuple[int, ...] = (0, 1)
    lock_values: tuple[int, ...] | None = None
    cas_policy: str = "read-write"
    any_config: bool = False
    note: str = ""

    def __post_init__(self) -> None:
        if (self.program is None) == (self.es_json is None):
            raise CorpusError(f"{self.name}: exactly one of 'program' or 'es' is required")
        expect = {}
        for mode, verdict in self.expect.items():
            if verdict not in EXPECTATIONS:
                raise CorpusError(f"{self.name}: expectation {verdict!r} for {mode} not in {EXPECTATIONS}")
            try:
                expect[normalize_mode(mode)] = verdict
            except ValueError as exc:
                raise CorpusError(f"{self.name}: {exc}") from exc
        self.expect = expect
        if all(v == "unspecified" for v in expect.values()):
            raise CorpusError(f"{self.name}: every expectation is unspecified")
        try:
            parse_query(self.query)
        except ValueError as exc:
            raise CorpusError(f"{self.name}: {exc}") from exc

    def structure(self, base: Path | None = None) -> EventStructure:
        if self.program is not None:
            return compile_program(
                self.program, self.values, lock_values=self.lock_values, cas_policy=self.cas_policy  # type: ignore[arg-type]
            )
        path = Path(self.es_json)  # type: ignore[arg-type]
        if not path.is_absolute() and base is not None:
            path = base / path
        return es_mod.loads(path.read_text())


_ENTRY_KEYS = {"name", "program", "es", "values", "lock_values", "cas_policy", "query", "expect", "any_config", "note"}


def entry_from_dict(obj: dict) -> CorpusEntry:
    if not isinstance(obj, dict):
        raise CorpusError(f"corpus entry must be a mapping, got {type(obj).__name__}")
    unknown = set(obj) - _ENTRY_KEYS
    if unknown:
        raise CorpusError(f"{obj.get('name', '?')}: unknown keys {sorted(unknown)}")
    for key in ("name", "query", "expect"):
        if key not in obj:
            raise CorpusError(f"{obj.get('name', '?')}: missing {key!r}")
    if not isinstance(obj["expect"], dict):
        raise CorpusError(f"{obj['name']}: 'expect' must map modes to verdicts")
    lv = obj.get("lock_values")
    return CorpusEntry(
        name=str(obj["name"]),
        query=str(obj["query"]),
        expect={str(k): str(v) for k, v in obj["expect"].items()},
        program=obj.get("program"),
        es_json=obj.get("es"),
        values=parse_values(obj.get("values")),
        lock_values=None if lv is None else parse_values(lv),
        cas_policy=obj.get("cas_policy", "read-write"),
        any_config=bool(obj.get("any_config", False)),
        note=str(obj.get("note", "")),
    )


def load_corpus(text: str) -> list[CorpusEntry]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CorpusError(f"malformed corpus: {exc}") from exc
    if data is None:
        return []
    if isinstance(data, dict) and "entries" in data:
        data = data["entries"] or []
    if not isinstance(data, list):
        raise CorpusError("corpus must be a list of entries")
    entries = [entry_from_dict(obj) for obj in data]
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise CorpusError("duplicate entry names")
    return entries


def shipped_corpus_path() -> Path:
    return Path(str(resources.files("esmem") / "data" / "corpus.yaml"))


def figures_dir() -> Path:
    return Path(str(resources.files("esmem") / "data" / "figures"))


# ------------------------------------------------------------------ verdicts


@dataclass
class Verdict:
    mode: str
    allowed: bool
    witness: int | None
    candidates: int

    @property
    def word(self) -> str:
        return "allowed" if self.allowed else "forbidden"


def _mode_set(es: EventStructure, mode: str) -> frozenset[int] | None:
    """The whole set of good configurations, for modes computed that way."""
    if mode == "wj":
        return well_justified_configurations(es)
    if mode == "sc":
        from .seqcon import sc_configurations

        return sc_configurations(es)
    if mode == "fenced":
        from .fence import well_fenced_configurations

        return well_fenced_configurations(es)
    return None


def evaluate(es: EventStructure, query: Query | str, mode: str, *, any_config: bool = False) -> Verdict:
    """Allowed iff some maximal (or any) configuration satisfying ``query`` passes ``mode``."""
    if es.n > MAX_EVENTS:
        raise CapacityError(f"{es.n} events exceeds the limit of {MAX_EVENTS}")
    mode = normalize_mode(mode)
    q = parse_query(query) if isinstance(query, str) else query
    check_alphabet(q, es.alphabet)
    pool = es.configurations() if any_config else es.maximal_configurations()
    cands = [c for c in pool if holds(q, {es.labels[e] for e in bits(c)})]
    cands.sort(key=lambda c: (bin(c).count("1"), c))
    good = _mode_set(es, mode)
    if good is not None:
        hit = next((c for c in cands if c in good), None)
    else:
        pred = predicate(es, mode)
        hit = next((c for c in cands if pred(c)), None)
    return Verdict(mode, hit is not None, hit, len(cands))


def verdict_table(es: EventStructure, modes: Iterable[str] = MODES, *, any_config: bool = False) -> dict[int, dict[str, bool]]:
    pool = sorted(es.configurations()) if any_config else es.maximal_configurations()
    table: dict[int, dict[str, bool]] = {c: {} for c in pool}
    for mode in modes:
        for c, ok in enumerate_verdicts(es, mode, pool).items():
            table[c][normalize_mode(mode)] = ok
    return table


# -------------------------------------------------------------------- runner


@dataclass
class EntryResult:
    entry: str
    rows: list[tuple[str, str, str, bool]] = field(default_factory=list)  # mode, expected, actual, pass
    error: str | None = None
    timed_out: bool = False
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and not self.timed_out and all(r[3] for r in self.rows)

    def to_json(self) -> dict:
        return {
            "entry": self.entry,
            "rows": [{"mode": m, "expected": e, "actual": a, "pass": p} for m, e, a, p in self.rows],
            "error": self.error,
            "timed_out": self.timed_out,
            "seconds": round(self.seconds, 3),
        }


def _alarm(signum, frame):
    raise EntryTimeout()


def run_entry(entry: CorpusEntry, base: Path | None = None, timeout: float | None = DEFAULT_TIMEOUT) -> EntryResult:
    res = EntryResult(entry.name)
    start = time.perf_counter()
    use_alarm = bool(timeout) and hasattr(signal, "setitimer")
    if use_alarm:
        old = signal.signal(signal.SIGALRM, _alarm)
        signal.setitimer(signal.ITIMER_REAL, float(timeout))  # type: ignore[arg-type]
    try:
        es = entry.structure(base)
        for mode, expected in entry.expect.items():
            if expected == "unspecified":
                continue
            v = evaluate(es, entry.query, mode, any_config=entry.any_config)
            res.rows.append((mode, expected, v.word, v.word == expected))
    except EntryTimeout:
        res.timed_out = True
    except (ValueError, KeyError, OSError) as exc:
        res.error = str(exc)
    finally:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, old)
    res.seconds = time.perf_counter() - start
    return res


def _run_indexed(args: tuple[int, CorpusEntry, Path | None, float | None]) -> tuple[int, EntryResult]:
    i, entry, base, timeout = args
    return i, run_entry(entry, base, timeout)


def run_corpus(
    entries: list[CorpusEntry], base: Path | None = None, *, timeout: float | None = DEFAULT_TIMEOUT, jobs: int = 1
) -> list[EntryResult]:
    """Results in entry order, whatever the scheduling."""
    work = [(i, e, base, timeout) for i, e in enumerate(entries)]
    if jobs <= 1 or len(entries) <= 1:
        out = [_run_indexed(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            out = list(ex.map(_run_indexed, work))
    return [r for _, r in sorted(out, key=lambda t: t[0])]


def results_json(results: list[EntryResult]) -> str:
    return json.dumps([r.to_json() for r in results], indent=2)
