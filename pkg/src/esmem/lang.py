"""Toy shared-memory language: AST, parser, desugaring and expression evaluation.

Surface programs may mention shared variables inside expressions. Desugaring
hoists each such occurrence into a read statement on a fresh register, so the
core language only touches memory through explicit read, write, lock and CAS
statements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


class ParseError(ValueError):
    """Syntax error with a 1-based source position."""

    def __init__(self, msg: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Reg:
    name: str


@dataclass(frozen=True)
class Var:
    """Shared-variable occurrence; only legal before desugaring."""

    name: str


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Reg, Var, Not, BinOp]

BINOPS = ("+", "-", "*", "==", "!=", "<=", "<")

# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class Read:
    reg: str
    var: str


@dataclass(frozen=True)
class Write:
    var: str
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class Acq:
    expr: Expr


@dataclass(frozen=True)
class Rel:
    expr: Expr


@dataclass(frozen=True)
class Cas:
    var: str
    old: int
    new: int
    reg: str


Stmt = Union[Read, Write, If, Acq, Rel, Cas]


@dataclass(frozen=True)
class Thread:
    stmts: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Program:
    threads: tuple[Thread, ...]


Store = Mapping[str, int]

# -------------------------------------------------------------------- lexing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\|\||==|!=|<=|[<=!+\-*(){};,])
    """,
    re.VERBOSE,
)

KEYWORDS = {"if", "else", "acq", "rel", "cas"}
_REG_RE = re.compile(r"r[A-Za-z0-9]*\Z")
_VAR_RE = re.compile(r"[a-z]\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # int, reg, var, kw, op, eof
    text: str
    line: int
    col: int


def is_register(name: str) -> bool:
    return bool(_REG_RE.match(name))


def is_variable(name: str) -> bool:
    return bool(_VAR_RE.match(name)) and not is_register(name)


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "int":
            toks.append(Token("int", s, line, col))
        elif kind == "ident":
            if s in KEYWORDS:
                toks.append(Token("kw", s, line, col))
            elif is_register(s):
                toks.append(Token("reg", s, line, col))
            elif is_variable(s):
                toks.append(Token("var", s, line, col))
            else:
                raise ParseError(f"unknown identifier {s!r}", line, col)
        elif kind == "op":
            toks.append(Token("op", s, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


# ------------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, toks: list[Token]) -> None:
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str) -> ParseError:
        t = self.cur
        found = t.text or "end of input"
        return ParseError(f"{msg}, found {found!r}", t.line, t.col)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        t = self.cur
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            raise self.error(f"expected {text or kind}")
        return t

    def program(self) -> Program:
        if self.cur.kind == "eof":
            raise self.error("empty program")
        threads = [self.thread()]
        while self.accept("op", "||"):
            threads.append(self.thread())
        if self.cur.kind != "eof":
            raise self.error("expected statement or '||'")
        return Program(tuple(threads))

    def thread(self) -> Thread:
        stmts = []
        while self.cur.kind != "eof" and not (self.cur.kind == "op" and self.cur.text in ("||", "}")):
            stmts.append(self.stmt())
        return Thread(tuple(stmts))

    def block(self) -> tuple[Stmt, ...]:
        self.expect("op", "{")
        stmts = []
        while not self.accept("op", "}"):
            if self.cur.kind == "eof":
                raise self.error("expected '}'")
            stmts.append(self.stmt())
        return tuple(stmts)

    def stmt(self) -> Stmt:
        t = self.cur
        if t.kind == "reg":
            self.i += 1
            self.expect("op", "=")
            v = self.expect("var")
            self.expect("op", ";")
            return Read(t.text, v.text)
        if t.kind == "var":
            self.i += 1
            self.expect("op", "=")
            e = self.expr()
            self.expect("op", ";")
            return Write(t.text, e)
        if self.accept("kw", "if"):
            self.expect("op", "(")
            c = self.expr()
            self.expect("op", ")")
            then = self.block()
            orelse = self.block() if self.accept("kw", "else") else ()
            return If(c, then, orelse)
        if t.kind == "kw" and t.text in ("acq", "rel"):
            self.i += 1
            self.expect("op", "(")
            e = self.expr()
            self.expect("op", ")")
            self.expect("op", ";")
            return Acq(e) if t.text == "acq" else Rel(e)
        if self.accept("kw", "cas"):
            self.expect("op", "(")
            v = self.expect("var").text
            self.expect("op", ",")
            old = int(self.expect("int").text)
            self.expect("op", ",")
            new = int(self.expect("int").text)
            self.expect("op", ",")
            r = self.expect("reg").text
            self.expect("op", ")")
            self.expect("op", ";")
            return Cas(v, old, new, r)
        raise self.error("expected statement")

    # expr := add (cmp add)?
    def expr(self) -> Expr:
        left = self.additive()
        t = self.cur
        if t.kind == "op" and t.text in ("==", "!=", "<=", "<"):
            self.i += 1
            return BinOp(t.text, left, self.additive())
        return left

    def additive(self) -> Expr:
        e = self.term()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            op = self.cur.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.accept("op", "*"):
            e = BinOp("*", e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("op", "!"):
            return Not(self.unary())
        t = self.cur
        if self.accept("int"):
            return Const(int(t.text))
        if self.accept("reg"):
            return Reg(t.text)
        if self.accept("var"):
            return Var(t.text)
        if self.accept("op", "("):
            e = self.expr()
            self.expect("op", ")")
            return e
        raise self.error("expected expression")


def parse_program(text: str) -> Program:
    """Parse surface syntax; threads are separated by ``||``."""
    return _Parser(tokenize(text)).program()


def parse_expr(text: str) -> Expr:
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.cur.kind != "eof":
        raise p.error("trailing input")
    return e


# ------------------------------------------------------------------ printing


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, (Reg, Var)):
        return e.name
    if isinstance(e, Not):
        return "!" + format_expr(e.arg)
    return f"({format_expr(e.left)}{e.op}{format_expr(e.right)})"


def _format_block(stmts: tuple[Stmt, ...]) -> str:
    return "{" + " ".join(format_stmt(s) for s in stmts) + "}"


def format_stmt(s: Stmt) -> str:
    if isinstance(s, Read):
        return f"{s.reg}={s.var};"
    if isinstance(s, Write):
        return f"{s.var}={format_expr(s.expr)};"
    if isinstance(s, If):
        return f"if({format_expr(s.cond)}){_format_block(s.then)} else {_format_block(s.orelse)}"
    if isinstance(s, Acq):
        return f"acq({format_expr(s.expr)});"
    if isinstance(s, Rel):
        return f"rel({format_expr(s.expr)});"
    return f"cas({s.var},{s.old},{s.new},{s.reg});"


def format_program(p: Program) -> str:
    return " || ".join(" ".join(format_stmt(s) for s in t.stmts) for t in p.threads)


# ---------------------------------------------------------------- desugaring


def expr_vars(e: Expr) -> Iterator[str]:
    """Variable occurrences, left to right."""
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, Not):
        yield from expr_vars(e.arg)
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)


def _expr_regs(e: Expr) -> Iterator[str]:
    if isinstance(e, Reg):
        yield e.name
    elif isinstance(e, Not):
        yield from _expr_regs(e.arg)
    elif isinstance(e, BinOp):
        yield from _expr_regs(e.left)
        yield from _expr_regs(e.right)


def registers(stmts: tuple[Stmt, ...]) -> set[str]:
    out: set[str] = set()
    for s in stmts:
        if isinstance(s, (Read, Cas)):
            out.add(s.reg)
        elif isinstance(s, Write):
            out.update(_expr_regs(s.expr))
        elif isinstance(s, (Acq, Rel)):
            out.update(_expr_regs(s.expr))
        elif isinstance(s, If):
            out.update(_expr_regs(s.cond))
            out |= registers(s.then) | registers(s.orelse)
    return out


def _fresh_names(used: set[str]) -> Iterator[str]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    width = 1
    while True:
        stack = [""]
        for _ in range(width):
            stack = [p + c for p in stack for c in letters]
        for suffix in stack:
            name = "r" + suffix
            if name not in used:
                used.add(name)
                yield name
        width += 1


class _Desugarer:
    def __init__(self, used: set[str]) -> None:
        self.fresh = _fresh_names(used)

    def hoist(self, e: Expr, out: list[Stmt]) -> Expr:
        if isinstance(e, Var):
            r = next(self.fresh)
            out.append(Read(r, e.name))
            return Reg(r)
        if isinstance(e, Not):
            return Not(self.hoist(e.arg, out))
        if isinstance(e, BinOp):
            left = self.hoist(e.left, out)
            return BinOp(e.op, left, self.hoist(e.right, out))
        return e

    def block(self, stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, Write):
                out.append(Write(s.var, self.hoist(s.expr, out)))
            elif isinstance(s, Acq):
                out.append(Acq(self.hoist(s.expr, out)))
            elif isinstance(s, Rel):
                out.append(Rel(self.hoist(s.expr, out)))
            elif isinstance(s, If):
                c = self.hoist(s.cond, out)
                out.append(If(c, self.block(s.then), self.block(s.orelse)))
            else:
                out.append(s)
        return tuple(out)


def desugar(p: Program) -> Program:
    """Hoist variable occurrences out of expressions into fresh-register reads."""
    threads = []
    for t in p.threads:
        threads.append(Thread(_Desugarer(registers(t.stmts)).block(t.stmts)))
    return Program(tuple(threads))


def is_core(p: Program) -> bool:
    def ok(stmts: tuple[Stmt, ...]) -> bool:
        for s in stmts:
            if isinstance(s, (Write, Acq, Rel)) and any(expr_vars(s.expr)):
                return False
            if isinstance(s, If) and (any(expr_vars(s.cond)) or not ok(s.then) or not ok(s.orelse)):
                return False
        return True

    return all(ok(t.stmts) for t in p.threads)


# ---------------------------------------------------------------- evaluation


def eval_expr(e: Expr, store: Store) -> int:
    """Evaluate a core expression; unassigned registers read as 0."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Reg):
        return store.get(e.name, 0)
    if isinstance(e, Not):
        return int(eval_expr(e.arg, store) == 0)
    if isinstance(e, BinOp):
        a, b = eval_expr(e.left, store), eval_expr(e.right, store)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "==":
            return int(a == b)
        if e.op == "!=":
            return int(a != b)
        if e.op == "<=":
            return int(a <= b)
        if e.op == "<":
            return int(a < b)
        raise ValueError(f"unknown operator {e.op!r}")
    raise TypeError(f"variable {e.name!r} in expression; desugar first")


def update(store: Store, reg: str, value: int) -> dict[str, int]:
    out = dict(store)
    out[reg] = value
    return out


# ------------------------------------------------------------------ lock lint


def check_locks(p: Program) -> list[str]:
    """Report lock-discipline problems.

    Every release must be preceded, on every path through its thread, by an
    acquire of the same thread that has not been released yet, and acquires
    do not nest.
    """
    issues: list[str] = []

    def walk(stmts: tuple[Stmt, ...], held: frozenset[bool], k: int) -> frozenset[bool]:
        for s in stmts:
            if isinstance(s, Acq):
                if True in held:
                    issues.append(f"thread {k}: nested acquire {format_stmt(s)}")
                held = frozenset({True})
            elif isinstance(s, Rel):
                if False in held:
                    issues.append(f"thread {k}: release without a matching acquire {format_stmt(s)}")
                held = frozenset({False})
            elif isinstance(s, If):
                held = walk(s.then, held, k) | walk(s.orelse, held, k)
        return held

    for k, t in enumerate(p.threads, 1):
        end = walk(t.stmts, frozenset({False}), k)
        if True in end:
            issues.append(f"thread {k}: lock still held at thread end")
    return issues
