"""Behavior queries: boolean combinations of ``exists <action>`` atoms.

A query is evaluated against the label set of one configuration, e.g.
``exists R x 1 && exists R y 1`` asks whether both reads of 1 occur.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .es import Action, Alphabet, parse_action


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Exists:
    action: Action

    def __str__(self) -> str:
        return f"exists {self.action}"


@dataclass(frozen=True)
class QAnd:
    left: "Query"
    right: "Query"

    def __str__(self) -> str:
        return f"({self.left} && {self.right})"


@dataclass(frozen=True)
class QOr:
    left: "Query"
    right: "Query"

    def __str__(self) -> str:
        return f"({self.left} || {self.right})"


@dataclass(frozen=True)
class QNot:
    arg: "Query"

    def __str__(self) -> str:
        return f"!{self.arg}"


@dataclass(frozen=True)
class QTrue:
    def __str__(self) -> str:
        return "true"


Query = Union[Exists, QAnd, QOr, QNot, QTrue]

_TOKEN = re.compile(r"\s*(&&|\|\||!|\(|\)|[A-Za-z_][A-Za-z0-9_]*|-?\d+)")
_ACTION_ARITY = {"R": 2, "W": 2, "RMW": 3, "LA": 1, "LR": 1, "init": 0}


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise QueryError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_query(text: str) -> Query:
    """Parse a query; ``!`` binds tightest, then ``&&``, then ``||``."""
    toks = _tokens(text)
    if not toks:
        raise QueryError("empty query")
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(toks):
            raise QueryError("unexpected end of query")
        pos += 1
        return toks[pos - 1]

    def disj() -> Query:
        q = conj()
        while peek() == "||":
            take()
            q = QOr(q, conj())
        return q

    def conj() -> Query:
        q = unary()
        while peek() == "&&":
            take()
            q = QAnd(q, unary())
        return q

    def unary() -> Query:
        tok = take()
        if tok == "!":
            return QNot(unary())
        if tok == "(":
            q = disj()
            if take() != ")":
                raise QueryError("expected )")
            return q
        if tok == "true":
            return QTrue()
        if tok != "exists":
            raise QueryError(f"expected 'exists', got {tok!r}")
        kind = take()
        if kind not in _ACTION_ARITY:
            raise QueryError(f"unknown action kind {kind!r}")
        args = [take() for _ in range(_ACTION_ARITY[kind])]
        try:
            return Exists(parse_action(" ".join([kind, *args])))
        except ValueError as exc:
            raise QueryError(str(exc)) from exc

    q = disj()
    if peek() is not None:
        raise QueryError(f"trailing input at {peek()!r}")
    return q


def holds(q: Query, labels: Iterable[Action] | frozenset[Action]) -> bool:
    labels = labels if isinstance(labels, (set, frozenset)) else frozenset(labels)
    if isinstance(q, QTrue):
        return True
    if isinstance(q, Exists):
        return q.action in labels
    if isinstance(q, QNot):
        return not holds(q.arg, labels)
    if isinstance(q, QAnd):
        return holds(q.left, labels) and holds(q.right, labels)
    if isinstance(q, QOr):
        return holds(q.left, labels) or holds(q.right, labels)
    raise TypeError(f"not a query: {q!r}")


def atoms(q: Query) -> list[Action]:
    if isinstance(q, Exists):
        return [q.action]
    if isinstance(q, QNot):
        return atoms(q.arg)
    if isinstance(q, (QAnd, QOr)):
        return atoms(q.left) + atoms(q.right)
    return []


def check_alphabet(q: Query, alphabet: Alphabet) -> None:
    """Reject atoms naming actions the alphabet cannot produce."""
    for a in atoms(q):
        if not alphabet.contains(a):
            raise QueryError(f"query mentions {a}, which is outside the program's alphabet")
