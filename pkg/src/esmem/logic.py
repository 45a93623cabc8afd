"""A small safety logic over label sets, with invariant and tautology checks.

Formulae are built from ``x!=v`` and ``x:T`` atoms with conjunction and
disjunction. Both atom kinds only constrain the values that actions touch,
so every formula is closed under taking subsets; the enumerating checks below
confirm this rather than assume it, except where noted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .es import Action, Alphabet, EventRef, EventStructure, bits

MAX_ENUM_ACTIONS = 20

TypeEnv = Mapping[str, frozenset[int]]


class CapacityError(ValueError):
    pass


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class NotEq:
    var: str
    value: int

    def __str__(self) -> str:
        return f"{self.var}!={self.value}"


@dataclass(frozen=True)
class HasType:
    var: str
    type_name: str

    def __str__(self) -> str:
        return f"{self.var}:{self.type_name}"


@dataclass(frozen=True)
class TrueF:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseF:
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} && {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} || {self.right})"


Formula = Union[NotEq, HasType, TrueF, FalseF, And, Or]


# ------------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<op>&&|\|\||!=|≠|∧|∨|[():])|(?P<num>-?\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*))")


def _tokens(text: str) -> list[str]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        tok = m.group("op") or m.group("num") or m.group("id")
        out.append({"≠": "!=", "∧": "&&", "∨": "||"}.get(tok, tok))
        pos = m.end()
    return out


def parse_formula(text: str) -> Formula:
    """Parse ``x!=1 && (y:Unit || true)``; ``&&`` binds tighter than ``||``."""
    toks = _tokens(text)
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise FormulaError(f"expected {expected or 'a token'}, got {tok or 'end of input'}")
        pos += 1
        return tok

    def disj() -> Formula:
        f = conj()
        while peek() == "||":
            take()
            f = Or(f, conj())
        return f

    def conj() -> Formula:
        f = atom()
        while peek() == "&&":
            take()
            f = And(f, atom())
        return f

    def atom() -> Formula:
        tok = take()
        if tok == "(":
            f = disj()
            take(")")
            return f
        if tok == "true":
            return TrueF()
        if tok == "false":
            return FalseF()
        if not re.fullmatch(r"[A-Za-z_]\w*", tok):
            raise FormulaError(f"unexpected {tok!r}")
        op = take()
        if op == "!=":
            num = take()
            if not re.fullmatch(r"-?\d+", num):
                raise FormulaError(f"expected a value after !=, got {num!r}")
            return NotEq(tok, int(num))
        if op == ":":
            name = take()
            if not re.fullmatch(r"[A-Za-z_]\w*", name):
                raise FormulaError(f"expected a type name, got {name!r}")
            return HasType(tok, name)
        raise FormulaError(f"expected != or : after {tok}, got {op!r}")

    f = disj()
    if peek() is not None:
        raise FormulaError(f"trailing input at {peek()!r}")
    return f


def parse_type_env(specs: Iterable[str]) -> dict[str, frozenset[int]]:
    """``["Unit=0", "Bit=0,1"]`` to a type environment."""
    env: dict[str, frozenset[int]] = {}
    for spec in specs:
        name, sep, vals = spec.partition("=")
        if not sep or not name.strip():
            raise FormulaError(f"bad type binding {spec!r}; expected NAME=v1,v2")
        try:
            env[name.strip()] = frozenset(int(v) for v in vals.split(",") if v.strip())
        except ValueError as exc:
            raise FormulaError(f"bad type binding {spec!r}") from exc
    return env


# --------------------------------------------------------------- satisfaction


def satisfies(actions: Iterable[Action], phi: Formula, types: TypeEnv | None = None) -> bool:
    types = types or {}
    acts = list(actions)
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, And):
        return satisfies(acts, phi.left, types) and satisfies(acts, phi.right, types)
    if isinstance(phi, Or):
        return satisfies(acts, phi.left, types) or satisfies(acts, phi.right, types)
    if isinstance(phi, NotEq):
        return all((x, v) != (phi.var, phi.value) for a in acts for x, v in a.touched())
    if isinstance(phi, HasType):
        if phi.type_name not in types:
            raise FormulaError(f"unknown type {phi.type_name!r}")
        allowed = types[phi.type_name]
        return all(v in allowed for a in acts for x, v in a.touched() if x == phi.var)
    raise TypeError(f"not a formula: {phi!r}")


def check_types(phi: Formula, types: TypeEnv) -> None:
    """Raise on type names missing from ``types``."""
    if isinstance(phi, HasType) and phi.type_name not in types:
        raise FormulaError(f"unknown type {phi.type_name!r}")
    if isinstance(phi, (And, Or)):
        check_types(phi.left, types)
        check_types(phi.right, types)


def labels_of(es: EventStructure, c: int | Iterable[EventRef]) -> frozenset[Action]:
    return frozenset(es.labels[e] for e in bits(es.mask(c)))


# ------------------------------------------------- label-set level properties


class _Sat:
    """Satisfaction of one formula over subsets of a fixed action list, by mask."""

    def __init__(self, phi: Formula, alphabet: Alphabet, types: TypeEnv | None) -> None:
        self.actions = alphabet.actions()
        if len(self.actions) > MAX_ENUM_ACTIONS:
            raise CapacityError(
                f"alphabet has {len(self.actions)} actions; enumeration is capped at 2^{MAX_ENUM_ACTIONS} subsets"
            )
        self.alphabet = alphabet
        self.phi = phi
        self.types = types or {}
        check_types(phi, self.types)
        self.full = (1 << len(self.actions)) - 1
        self._memo: dict[int, bool] = {}

    def __call__(self, m: int) -> bool:
        hit = self._memo.get(m)
        if hit is None:
            hit = self._memo[m] = satisfies([self.actions[i] for i in bits(m)], self.phi, self.types)
        return hit

    def subsets(self):
        return range(self.full + 1)

    def justified_reads(self, m: int) -> int:
        """Read actions with a justifier among the actions of ``m``."""
        acts, a = self.actions, self.alphabet
        out = 0
        for i, r in enumerate(acts):
            if a.is_read(r) and any(a.justifies(acts[j], r) for j in bits(m)):
                out |= 1 << i
        return out


def is_subset_closed(phi: Formula, alphabet: Alphabet, types: TypeEnv | None = None) -> bool:
    """Every subset of a satisfying set satisfies, checked by enumeration."""
    sat = _Sat(phi, alphabet, types)
    # single removals suffice: closure under them gives closure under subsets
    return all(not sat(m) or all(sat(m & ~(1 << i)) for i in bits(m)) for m in sat.subsets())


def is_satisfiable(phi: Formula, alphabet: Alphabet, types: TypeEnv | None = None) -> bool:
    sat = _Sat(phi, alphabet, types)
    return any(sat(m) for m in sat.subsets())


def _subsets_of(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def justification_counterexample(
    phi: Formula, alphabet: Alphabet, types: TypeEnv | None = None
) -> tuple[frozenset[Action], frozenset[Action]] | None:
    """A pair ``(A, B)`` where ``A`` satisfies, justifies ``B`` and ``B`` does not.

    ``A`` justifies ``B`` when ``B`` holds only reads, each justified by some
    action of ``A``. For subset-closed formulae the largest such ``B`` decides.
    """
    sat = _Sat(phi, alphabet, types)
    closed = is_subset_closed(phi, alphabet, types)
    acts = sat.actions
    for a in sat.subsets():
        if not sat(a):
            continue
        top = sat.justified_reads(a)
        candidates = [top] if closed else _subsets_of(top)
        for b in candidates:
            if not sat(b):
                # prefer a single offending read for a readable witness
                b = next((1 << i for i in bits(b) if not sat(1 << i)), b)
                return frozenset(acts[i] for i in bits(a)), frozenset(acts[i] for i in bits(b))
    return None


def respects_justification(phi: Formula, alphabet: Alphabet, types: TypeEnv | None = None) -> bool:
    return justification_counterexample(phi, alphabet, types) is None


# ------------------------------------------------------ structure-level checks


def invariant_counterexample(es: EventStructure, phi: Formula, types: TypeEnv | None = None) -> int | None:
    """Smallest configuration whose reads satisfy ``phi`` but whose labels do not."""
    types = types or {}
    check_types(phi, types)
    bad = [
        c for c in es.configurations()
        if satisfies((es.labels[e] for e in bits(c & es.read_mask)), phi, types)
        and not satisfies(labels_of(es, c), phi, types)
    ]
    return min(bad, key=lambda c: (bin(c).count("1"), c)) if bad else None


def is_invariant(es: EventStructure, phi: Formula, types: TypeEnv | None = None) -> bool:
    return invariant_counterexample(es, phi, types) is None


def _good_configurations(es: EventStructure, mode: str) -> list[int]:
    from .game import alt_well_justified, normalize_mode, well_justified_configurations

    mode = normalize_mode(mode)
    if mode == "wj":
        return sorted(well_justified_configurations(es))
    if mode == "alt":
        return [c for c in es.configurations() if alt_well_justified(es, c)[0]]
    raise ValueError(f"tautology mode must be wj or alt, not {mode!r}")


def tautology_counterexample(
    es: EventStructure, phi: Formula, types: TypeEnv | None = None, mode: str = "wj"
) -> int | None:
    types = types or {}
    check_types(phi, types)
    bad = [c for c in _good_configurations(es, mode) if not satisfies(labels_of(es, c), phi, types)]
    return min(bad, key=lambda c: (bin(c).count("1"), c)) if bad else None


def is_tautology(es: EventStructure, phi: Formula, types: TypeEnv | None = None, mode: str = "wj") -> bool:
    return tautology_counterexample(es, phi, types, mode) is None


@dataclass
class InvariantReport:
    satisfiable: bool
    subset_closed: bool
    respects_justification: bool
    invariant: bool
    tautology: bool
    invariant_witness: list[str] | None = None
    tautology_witness: list[str] | None = None
    justification_witness: tuple[list[str], list[str]] | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def premises_hold(self) -> bool:
        return self.satisfiable and self.subset_closed and self.respects_justification and self.invariant

    @property
    def bug_alarm(self) -> bool:
        return self.premises_hold and not self.tautology

    def to_json(self) -> dict:
        return {
            "satisfiable": self.satisfiable,
            "subset_closed": self.subset_closed,
            "respects_justification": self.respects_justification,
            "invariant": self.invariant,
            "tautology": self.tautology,
            "premises_hold": self.premises_hold,
            "bug_alarm": self.bug_alarm,
            "invariant_witness": self.invariant_witness,
            "tautology_witness": self.tautology_witness,
            "justification_witness": self.justification_witness,
        }


def theorem_inv_check(
    es: EventStructure, phi: Formula, types: TypeEnv | None = None, mode: str = "wj"
) -> InvariantReport:
    """Premises and conclusion of the invariant theorem for ``phi`` on ``es``."""
    types = types or {}
    a = es.alphabet
    jw = justification_counterexample(phi, a, types)
    inv = invariant_counterexample(es, phi, types)
    taut = tautology_counterexample(es, phi, types, mode)
    return InvariantReport(
        satisfiable=is_satisfiable(phi, a, types),
        subset_closed=is_subset_closed(phi, a, types),
        respects_justification=jw is None,
        invariant=inv is None,
        tautology=taut is None,
        invariant_witness=None if inv is None else es.names_of(inv),
        tautology_witness=None if taut is None else es.names_of(taut),
        justification_witness=None if jw is None else (sorted(map(str, jw[0])), sorted(map(str, jw[1]))),
    )
