"""Random small programs for property testing and sweeps."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .lang import Acq, BinOp, Const, Expr, If, Not, Program, Read, Reg, Rel, Stmt, Thread, Write


@dataclass
class ProgramShape:
    max_threads: int = 3
    max_stmts: int = 3
    variables: tuple[str, ...] = ("x", "y")
    values: tuple[int, ...] = (0, 1)
    locks: bool = False
    lock_only: bool = False
    lock_value: int = 2
    allow_if: bool = True


def _expr(rng: random.Random, regs: list[str], values: tuple[int, ...]) -> Expr:
    if not regs or rng.random() < 0.4:
        return Const(rng.choice(values))
    r = Reg(rng.choice(regs))
    roll = rng.random()
    if roll < 0.6:
        return r
    if roll < 0.8:
        return BinOp("==", r, Const(rng.choice(values)))
    return Not(r)


def _stmts(rng: random.Random, n: int, shape: ProgramShape, regs: list[str], depth: int = 0) -> list[Stmt]:
    out: list[Stmt] = []
    while len(out) < n:
        roll = rng.random()
        if roll < 0.4:
            reg = f"r{len(regs) + 1}"
            out.append(Read(reg, rng.choice(shape.variables)))
            regs.append(reg)
        elif roll < 0.8 or not regs or not shape.allow_if or depth > 0:
            out.append(Write(rng.choice(shape.variables), _expr(rng, regs, shape.values)))
        else:
            cond = _expr(rng, regs, shape.values)
            then = tuple(_stmts(rng, 1, shape, list(regs), depth + 1))
            orelse = tuple(_stmts(rng, 1, shape, list(regs), depth + 1)) if rng.random() < 0.5 else ()
            out.append(If(cond, then, orelse))
    return out


def random_program(rng: random.Random, shape: ProgramShape | None = None) -> Program:
    """A core-form program: reads into fresh registers, writes of register expressions."""
    shape = shape or ProgramShape()
    threads = []
    for _ in range(rng.randint(1, shape.max_threads)):
        n = rng.randint(1, shape.max_stmts)
        if shape.lock_only:
            stmts: list[Stmt] = [Acq(Const(shape.lock_value)), Rel(Const(shape.lock_value))] * max(1, n // 2)
        else:
            stmts = _stmts(rng, n, shape, [])
            if shape.locks and rng.random() < 0.7:
                stmts = [Acq(Const(shape.lock_value)), *stmts, Rel(Const(shape.lock_value))]
        threads.append(Thread(tuple(stmts)))
    return Program(tuple(threads))
