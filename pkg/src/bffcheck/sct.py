"""Size-change analysis restricted to canonical loops ``while (x != ~)``.

Every flattened assignment yields a fan-in free size-change graph over the
guard variables V, so each variable has a unique backward trace through a
sequence of graphs.  A trace summary maps each variable to the set of
origins its trace can reach over all sequences of a statement's language:
``(u, down)`` when it starts at ``u`` and passes a down-arrow iff ``down``,
or BROKEN when some sequence cuts the trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (Assign, If, OpApp, OracleCall, Procedure, Program, Seq, Skip, Var, While,
                     iter_stmts, seq, seq_items, iter_exprs)
from .words import DEFAULT_REGISTRY, OperatorRegistry

BROKEN = "broken"


class VariableSetMismatch(ValueError):
    pass


# --- flattening ------------------------------------------------------------------

def _flat_operand(e) -> bool:
    return isinstance(e, Var) or (isinstance(e, OpApp) and not e.args)


class _Flattener:
    def __init__(self, proc: Procedure):
        self.taken = set(proc.oracle_params) | set(proc.variables)
        self.fresh: list[str] = []
        self.n = 0

    def temp(self) -> str:
        while True:
            self.n += 1
            name = f"t{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                self.fresh.append(name)
                return name

    def operand(self, e, out: list):
        if _flat_operand(e):
            return e
        rhs = self.rhs(e, out)
        t = self.temp()
        out.append(Assign(t, rhs, e.span))
        return Var(t, e.span)

    def rhs(self, e, out: list):
        if isinstance(e, OpApp):
            return OpApp(e.op, tuple(self.operand(a, out) for a in e.args), e.span)
        if isinstance(e, OracleCall):
            return OracleCall(e.oracle, self.operand(e.data, out), self.operand(e.bound, out), e.span)
        return e

    def stmt(self, st):
        if isinstance(st, Seq):
            return seq(*(self.stmt(c) for c in seq_items(st)))
        if isinstance(st, Assign):
            out: list = []
            rhs = self.rhs(st.expr, out)
            if not out:
                return st
            return seq(*out, Assign(st.target, rhs, st.span))
        if isinstance(st, If):
            return If(st.cond, self.stmt(st.then), self.stmt(st.orelse), st.span)
        if isinstance(st, While):
            return While(st.cond, self.stmt(st.body), st.span)
        return st


def flatten(proc: Procedure) -> Procedure:
    """Name every nested operand with a fresh local so each assignment is flat."""
    f = _Flattener(proc)
    body = f.stmt(proc.body)
    if not f.fresh:
        return proc
    return Procedure(proc.name, proc.oracle_params, proc.word_params, proc.locals + tuple(f.fresh),
                     body, proc.ret, proc.span)


def flatten_program(prg: Program) -> Program:
    from .syntax import Declare
    layers = tuple(Declare(tuple(flatten(p) for p in layer.procs), layer.span)
                   if isinstance(layer, Declare) else layer for layer in prg.layers)
    return Program(layers, prg.main, prg.span)


def is_flat(st) -> bool:
    for node in iter_stmts(st):
        if isinstance(node, Assign):
            e = node.expr
            if isinstance(e, OpApp) and not all(_flat_operand(a) for a in e.args):
                return False
            if isinstance(e, OracleCall) and not (_flat_operand(e.data) and _flat_operand(e.bound)):
                return False
    return True


# --- size-change graphs ----------------------------------------------------------

@dataclass(frozen=True)
class SCG:
    vars: frozenset
    edges: frozenset  # (source, target, down)

    def __post_init__(self):
        targets = [t for _, t, _ in self.edges]
        assert len(targets) == len(set(targets)), "size-change graph has fan-in"

    def incoming(self, v):
        for s, t, d in self.edges:
            if t == v:
                return s, d
        return None


def scg_of_assignment(asg: Assign, V, registry: OperatorRegistry = DEFAULT_REGISTRY) -> SCG:
    V = frozenset(V)
    x, e = asg.target, asg.expr
    edges = {(v, v, False) for v in V if v != x}
    if isinstance(e, Var):
        edges.add((e.name, x, False))
    elif isinstance(e, OpApp):
        op = registry.get(e.op)
        if op.decrease is not None:
            arg = e.args[op.decrease.index - 1]
            if isinstance(arg, Var):
                edges.add((arg.name, x, op.decrease.strict))
    return SCG(V, frozenset(ed for ed in edges if ed[0] in V and ed[1] in V))


# --- trace summaries -------------------------------------------------------------

class TraceSummary:
    """Per-variable origin sets; immutable."""

    __slots__ = ("table",)

    def __init__(self, table):
        object.__setattr__(self, "table", {v: frozenset(o) for v, o in table.items()})

    def __setattr__(self, *_):
        raise AttributeError("TraceSummary is immutable")

    @property
    def vars(self) -> frozenset:
        return frozenset(self.table)

    def __getitem__(self, v) -> frozenset:
        return self.table[v]

    def __eq__(self, other):
        return isinstance(other, TraceSummary) and self.table == other.table

    def __hash__(self):
        return hash(frozenset(self.table.items()))

    def __repr__(self):
        parts = []
        for v in sorted(self.table):
            os = sorted(("!" if o == BROKEN else f"{o[0]}{'v' if o[1] else ''}") for o in self.table[v])
            parts.append(f"{v}<-{{{','.join(os)}}}")
        return f"TraceSummary({' '.join(parts)})"


def identity_summary(V) -> TraceSummary:
    return TraceSummary({v: {(v, False)} for v in V})


def summary_of_scg(g: SCG) -> TraceSummary:
    table = {}
    for v in g.vars:
        inc = g.incoming(v)
        table[v] = {inc} if inc is not None else {BROKEN}
    return TraceSummary(table)


def _same_vars(s1, s2):
    if s1.vars != s2.vars:
        raise VariableSetMismatch(f"{sorted(s1.vars)} vs {sorted(s2.vars)}")


def summary_compose(s1: TraceSummary, s2: TraceSummary) -> TraceSummary:
    """``s1`` followed by ``s2``."""
    _same_vars(s1, s2)
    table = {}
    for v, origins in s2.table.items():
        out = set()
        for o in origins:
            if o == BROKEN:
                out.add(BROKEN)
                continue
            u, d2 = o
            for o1 in s1.table[u]:
                out.add(BROKEN if o1 == BROKEN else (o1[0], o1[1] or d2))
        table[v] = out
    return TraceSummary(table)


def summary_union(s1: TraceSummary, s2: TraceSummary) -> TraceSummary:
    _same_vars(s1, s2)
    return TraceSummary({v: s1.table[v] | s2.table[v] for v in s1.table})


def summary_star(s: TraceSummary) -> TraceSummary:
    acc = identity_summary(s.vars)
    while True:
        nxt = summary_union(acc, summary_compose(acc, s))
        if nxt == acc:
            return acc
        acc = nxt


def _incoming(asg: Assign, V, registry):
    """The single edge into the target of ``asg`` restricted to V, as (source, down) or None."""
    e = asg.expr
    if isinstance(e, Var):
        return (e.name, False) if e.name in V else None
    if isinstance(e, OpApp):
        op = registry.get(e.op)
        if op.decrease is not None:
            arg = e.args[op.decrease.index - 1]
            if isinstance(arg, Var) and arg.name in V:
                return arg.name, op.decrease.strict
    return None


def _summarize(st, V, registry, table: dict) -> dict:
    # ``table`` is the summary of everything before ``st``; it is consumed
    if isinstance(st, Seq):
        for child in seq_items(st):
            table = _summarize(child, V, registry, table)
        return table
    if isinstance(st, Skip):
        return table
    if isinstance(st, Assign):
        if st.target in V:
            inc = _incoming(st, V, registry)
            if inc is None:
                table[st.target] = frozenset([BROKEN])
            else:
                u, d = inc
                table[st.target] = frozenset(BROKEN if o == BROKEN else (o[0], o[1] or d) for o in table[u])
        return table
    if isinstance(st, If):
        a = _summarize(st.then, V, registry, dict(table))
        b = _summarize(st.orelse, V, registry, table)
        return {v: a[v] | b[v] for v in a}
    if isinstance(st, While):
        body = TraceSummary(_summarize(st.body, V, registry, identity_summary(V).table.copy()))
        return summary_compose(TraceSummary(table), summary_star(body)).table.copy()
    raise TypeError(st)


def summarize(st, V, registry: OperatorRegistry = DEFAULT_REGISTRY) -> TraceSummary:
    """Summary of every graph sequence in the language of ``st``.

    Sequencing, branching and loops map to compose, union and star.
    Assignments only rewrite the entry of their target, so they are
    applied in place instead of composing a full graph summary.
    """
    V = frozenset(V)
    return TraceSummary(_summarize(st, V, registry, dict(identity_summary(V).table)))


def summarize_algebraic(st, V, registry: OperatorRegistry = DEFAULT_REGISTRY) -> TraceSummary:
    """Same result built only from the graph algebra; used as a cross-check."""
    V = frozenset(V)
    if isinstance(st, Seq):
        out = identity_summary(V)
        for child in seq_items(st):
            out = summary_compose(out, summarize_algebraic(child, V, registry))
        return out
    if isinstance(st, Skip):
        return identity_summary(V)
    if isinstance(st, Assign):
        return summary_of_scg(scg_of_assignment(st, V, registry))
    if isinstance(st, If):
        return summary_union(summarize_algebraic(st.then, V, registry),
                             summarize_algebraic(st.orelse, V, registry))
    if isinstance(st, While):
        return summary_star(summarize_algebraic(st.body, V, registry))
    raise TypeError(st)


# --- the per-loop check ----------------------------------------------------------

@dataclass
class LoopVerdict:
    procedure: str
    span: object
    guard_var: str | None
    accepted: bool
    reason: str = ""

    @property
    def loop(self) -> str:
        return f"{self.procedure}@{self.span}" if self.span else self.procedure


@dataclass
class ScpVerdict:
    loops: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return all(lv.accepted for lv in self.loops)


def canonical_guard_var(cond):
    """``x`` when the guard is exactly ``x != ~``, else None."""
    if (isinstance(cond, OpApp) and cond.op == "neq" and len(cond.args) == 2
            and isinstance(cond.args[0], Var)
            and isinstance(cond.args[1], OpApp) and cond.args[1].op == "eps" and not cond.args[1].args):
        return cond.args[0].name
    return None


def guard_variables(proc: Procedure) -> frozenset:
    out = set()
    for node in iter_stmts(proc.body):
        if isinstance(node, While):
            out |= {e.name for e in iter_exprs(node.cond) if isinstance(e, Var)}
    return frozenset(out)


def check_loop(loop: While, V, registry=DEFAULT_REGISTRY, procedure: str = "") -> LoopVerdict:
    x = canonical_guard_var(loop.cond)
    if x is None:
        return LoopVerdict(procedure, loop.span, None, False, "non-canonical-guard")
    S = summarize(loop.body, V, registry)
    origins = S[x]
    if origins == {(x, True)}:
        return LoopVerdict(procedure, loop.span, x, True, "down-thread")
    if BROKEN in origins:
        detail = "broken trace"
    elif (x, False) in origins:
        detail = "no down-arrow"
    else:
        detail = "foreign origin " + ", ".join(sorted(o[0] for o in origins if o[0] != x))
    return LoopVerdict(procedure, loop.span, x, False, f"missing-down-thread: {detail}")


def check_procedure(proc: Procedure, registry=DEFAULT_REGISTRY) -> list[LoopVerdict]:
    V = guard_variables(proc)
    flat = flatten(proc)
    return [check_loop(w, V, registry, proc.name) for w in iter_stmts(flat.body) if isinstance(w, While)]


def check_scps(prg: Program, registry: OperatorRegistry = DEFAULT_REGISTRY) -> ScpVerdict:
    out = ScpVerdict()
    for p in prg.procedures:
        out.loops.extend(check_procedure(p, registry))
    return out


def loop_word(st, V, registry=DEFAULT_REGISTRY) -> list:
    """One sequence of graphs from the language of ``st``: first branches, inner loops once."""
    if isinstance(st, Seq):
        return [g for c in seq_items(st) for g in loop_word(c, V, registry)]
    if isinstance(st, Assign):
        return [scg_of_assignment(st, V, registry)]
    if isinstance(st, If):
        return loop_word(st.then, V, registry)
    if isinstance(st, While):
        return loop_word(st.body, V, registry)
    return []
