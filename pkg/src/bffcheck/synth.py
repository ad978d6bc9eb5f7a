"""Synthetic straight-line-plus-loops programs for scaling measurements."""
from __future__ import annotations

import random

from .parser import pretty
from .syntax import (Assign, Box, Call, Closure, Declare, OpApp, OracleCall, Procedure, Program,
                     TVar, App, Var, While, iter_exprs, iter_stmts, iter_terms, seq, stmt_exprs)


def count_nodes(prg: Program) -> int:
    n = len(list(iter_terms(prg.main)))
    for p in prg.procedures:
        n += 1
        for st in iter_stmts(p.body):
            n += 1
        for e in stmt_exprs(p.body):
            n += sum(1 for _ in iter_exprs(e))
    return n


def _block(rng: random.Random, counters: list, data: list, depth: int) -> list:
    """A canonical loop over a fresh counter; its body grows tier-0 data."""
    c = counters.pop()
    body = []
    for _ in range(rng.randint(2, 5)):
        x, y = rng.choice(data), rng.choice(data)
        choice = rng.random()
        if choice < 0.3:
            rhs = OpApp(rng.choice(["suc0", "suc1"]), (Var(y),))
        elif choice < 0.5:
            rhs = OpApp("lmin", (Var(x), OpApp("pred", (Var(y),))))
        elif choice < 0.7:
            rhs = OracleCall("X", Var(y), Var(c))
        else:
            rhs = OpApp("head", (Var(y),))
        body.append(Assign(x, rhs))
    if depth > 0 and counters and rng.random() < 0.3:
        inner = counters[-1]
        body.append(Assign(inner, Var("w")))
        body.extend(_block(rng, counters, data, depth - 1))
    body.append(Assign(c, OpApp("pred", (Var(c),))))
    return [Assign(c, Var("w")), While(OpApp("neq", (Var(c), OpApp("eps"))), seq(*body))]


def synthetic_program(target_nodes: int, seed: int = 0, loops_per_proc: int = 8) -> Program:
    """A SAFE and size-change accepted program of roughly ``target_nodes`` nodes.

    Work is split across procedures of a few loops each, the way real code
    would be, and the main term chains their calls.
    """
    rng = random.Random(seed)
    procs = []
    main = TVar("w")
    nodes = 0
    i = 0
    while nodes < target_nodes:
        counters = [f"c{j}" for j in range(loops_per_proc * 2)]
        data = [f"d{j}" for j in range(4)]
        stmts = [Assign(d, Var("w")) for d in data]
        for _ in range(loops_per_proc):
            if len(counters) < 2:
                break
            stmts.extend(_block(rng, counters, data, 1))
            stmts.append(Assign("r", OpApp("lmin", (Var(rng.choice(data)), Var("r")))))
        used = sorted({s.target for s in iter_stmts(seq(*stmts)) if isinstance(s, Assign)} - {"r"})
        p = Procedure(f"P{i}", ("X",), ("w", "r"), tuple(used), seq(*stmts), "r")
        procs.append(p)
        main = Call(p.name, (Closure("x", App(TVar("F"), TVar("x"))),), (TVar("w"), main))
        nodes = count_nodes(Program((Box(("F", "w")), Declare(tuple(procs))), main))
        i += 1
    return Program((Box(("F", "w")), Declare(tuple(procs))), main)


def synthetic_source(target_nodes: int, seed: int = 0) -> str:
    return pretty(synthetic_program(target_nodes, seed))
