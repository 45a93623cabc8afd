"""Compile core programs into memory event structures.

Reads branch over every value of the value set, writes and lock operations
become single prefixed events, and a program is the parallel composition of
its threads under one init event.
"""

from __future__ import annotations

from typing import Iterable, Literal

from . import lang
from .es import Action, Alphabet, EventStructure, default_alphabet, empty, par, prefix, sum_
from .lang import Acq, Cas, If, Program, Read, Rel, Stmt, Store, Write, eval_expr, update

CasPolicy = Literal["read-write", "read-only"]

_Numbered = list[tuple[int, Stmt, list, list]]


class SemanticsError(ValueError):
    pass


def _number(stmts: tuple[Stmt, ...], start: int) -> tuple[_Numbered, int]:
    """Pre-order statement ordinals, 1-based."""
    out: _Numbered = []
    n = start
    for s in stmts:
        me = n
        n += 1
        then_n: _Numbered = []
        else_n: _Numbered = []
        if isinstance(s, If):
            then_n, n = _number(s.then, n)
            else_n, n = _number(s.orelse, n)
        out.append((me, s, then_n, else_n))
    return out, n


def _name(thread: int, path: tuple[int, ...], ordinal: int) -> str:
    return f"t{thread}[{','.join(map(str, path))}].{ordinal}"


class _ThreadCompiler:
    def __init__(self, alphabet: Alphabet, thread: int, cas_policy: CasPolicy) -> None:
        self.a = alphabet
        self.k = thread
        self.cas_policy = cas_policy
        self.values = sorted(alphabet.values)

    def check(self, v: int, allowed: Iterable[int], what: str) -> int:
        if v not in allowed:
            raise SemanticsError(f"thread {self.k}: {what} value {v} outside {sorted(allowed)}")
        return v

    def choice(self, branches: list[EventStructure]) -> EventStructure:
        acc = branches[0]
        for b in branches[1:]:
            acc = sum_(acc, b)
        return acc

    def run(self, code: _Numbered, store: Store, path: tuple[int, ...]) -> EventStructure:
        if not code:
            return empty(self.a)
        (n, s, then_n, else_n), rest = code[0], code[1:]
        if isinstance(s, Read):
            return self.choice([
                prefix(Action.read(s.var, v), self.run(rest, update(store, s.reg, v), path + (v,)),
                       _name(self.k, path + (v,), n))
                for v in self.values
            ])
        if isinstance(s, Write):
            v = self.check(eval_expr(s.expr, store), self.a.values, "write")
            return prefix(Action.write(s.var, v), self.run(rest, store, path), _name(self.k, path, n))
        if isinstance(s, If):
            branch = then_n if eval_expr(s.cond, store) != 0 else else_n
            return self.run(branch + rest, store, path)
        if isinstance(s, (Acq, Rel)):
            if not self.a.with_lock:
                raise SemanticsError("lock operation over an alphabet without locks")
            v = self.check(eval_expr(s.expr, store), self.a.lock_values, "lock")
            act = Action.acq(v) if isinstance(s, Acq) else Action.rel(v)
            return prefix(act, self.run(rest, store, path), _name(self.k, path, n))
        if isinstance(s, Cas):
            self.check(s.old, self.a.values, "cas")
            self.check(s.new, self.a.values, "cas")
            branches = []
            for v in self.values:
                if v == s.old:
                    act = Action.rmw(s.var, s.old, s.new)
                    st = update(store, s.reg, 1)
                elif self.cas_policy == "read-write":
                    act = Action.rmw(s.var, v, v)
                    st = update(store, s.reg, 0)
                else:
                    act = Action.read(s.var, v)
                    st = update(store, s.reg, 0)
                branches.append(prefix(act, self.run(rest, st, path + (v,)), _name(self.k, path + (v,), n)))
            return self.choice(branches)
        raise TypeError(f"unknown statement {s!r}")


def thread_semantics(
    stmts: tuple[Stmt, ...] | lang.Thread,
    store: Store,
    alphabet: Alphabet,
    *,
    thread: int = 1,
    cas_policy: CasPolicy = "read-write",
) -> EventStructure:
    if isinstance(stmts, lang.Thread):
        stmts = stmts.stmts
    if not lang.is_core(Program((lang.Thread(stmts),))):
        raise SemanticsError("thread is not in core form; desugar it first")
    code, _ = _number(stmts, 1)
    return _ThreadCompiler(alphabet, thread, cas_policy).run(code, store, ())


def _program_vars(stmts: tuple[Stmt, ...]) -> set[str]:
    out: set[str] = set()
    for s in stmts:
        if isinstance(s, (Read, Write, Cas)):
            out.add(s.var)
        elif isinstance(s, If):
            out |= _program_vars(s.then) | _program_vars(s.orelse)
    return out


def _has(stmts: tuple[Stmt, ...], kinds: tuple[type, ...]) -> bool:
    for s in stmts:
        if isinstance(s, kinds):
            return True
        if isinstance(s, If) and (_has(s.then, kinds) or _has(s.orelse, kinds)):
            return True
    return False


def program_alphabet(
    p: Program,
    values: Iterable[int] = (0, 1),
    *,
    lock_values: Iterable[int] | None = None,
    init_lock_zero_only: bool = False,
    variables: Iterable[str] = (),
) -> Alphabet:
    """Smallest default alphabet covering the variables and constructs of ``p``."""
    xs = set(variables)
    for t in p.threads:
        xs |= _program_vars(t.stmts)
    locks = any(_has(t.stmts, (Acq, Rel)) for t in p.threads) or lock_values is not None
    cas = any(_has(t.stmts, (Cas,)) for t in p.threads)
    return default_alphabet(
        xs, values, locks, lock_values=lock_values, rmw=cas, init_lock_zero_only=init_lock_zero_only
    )


def program_semantics(
    p: Program,
    alphabet: Alphabet | None = None,
    *,
    values: Iterable[int] = (0, 1),
    lock_values: Iterable[int] | None = None,
    cas_policy: CasPolicy = "read-write",
) -> EventStructure:
    """Init below the parallel composition of every thread's structure."""
    if alphabet is None:
        alphabet = program_alphabet(p, values, lock_values=lock_values)
    body = empty(alphabet)
    for k, t in enumerate(p.threads, 1):
        body = par(body, thread_semantics(t.stmts, {}, alphabet, thread=k, cas_policy=cas_policy))
    return prefix(Action.init(), body, "init")


def compile_program(
    text: str,
    values: Iterable[int] = (0, 1),
    *,
    lock_values: Iterable[int] | None = None,
    cas_policy: CasPolicy = "read-write",
) -> EventStructure:
    """Parse, desugar and compile program text."""
    p = lang.desugar(lang.parse_program(text))
    return program_semantics(p, values=values, lock_values=lock_values, cas_policy=cas_policy)
