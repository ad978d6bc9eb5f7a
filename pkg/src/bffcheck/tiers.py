"""Tier inference: SAFE and SAFE0 membership.

With the maximal safe operator environment every side condition of the
tier rules is an atom ``a + c <= b`` with ``c`` in {0, 1}, where a
distinguished node ZERO stands for the constant 0.  The least solution is
a longest-path fixpoint from ZERO; it fails when ZERO itself gets pushed
up or some tier passes ``kmax``.

Loops come in two flavours.  An initialising loop sits under outermost
tier 0 and makes its own guard tier the outermost tier of its body; a
standard loop needs ``1 <= k <= kout``.  Whiles nested in another while
always see ``kout >= 1``, so per procedure only two global cases exist:
top-level loops initialise (procedure ``kout = 0``) or none do.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .syntax import (Assign, If, OracleCall, Procedure, Program, Seq, Skip, Var, While,
                     iter_stmts, normalize, check_well_formed, seq_items)
from .words import DEFAULT_REGISTRY, OperatorRegistry

WINIT, WH = "WINIT", "WH"


@dataclass(frozen=True)
class TierTriple:
    k: int
    kin: int
    kout: int

    def as_list(self):
        return [self.k, self.kin, self.kout]


@dataclass
class ProcTyping:
    gamma: dict
    triple: TierTriple
    mode: str = ""
    values: dict = field(default_factory=dict, repr=False)
    loops: list = field(default_factory=list, repr=False)  # (span, rule, guard tier)


@dataclass
class Unsat:
    reason: str
    witness: list = field(default_factory=list)

    def __bool__(self):
        return False


# --- constraints -------------------------------------------------------------------

@dataclass
class ConstraintSet:
    names: list
    edges: list  # (a, b, c): tier[a] + c <= tier[b]
    gamma: dict
    K: int
    KIN: int
    KOUT: int
    mode: str
    loops: list = field(default_factory=list)  # (While node, rule, tier var)
    ZERO: int = 0

    def describe(self, atom) -> str:
        a, b, c = atom
        na, nb = self.names[a], self.names[b]
        if a == self.ZERO:
            return f"{c} <= {nb}"
        if b == self.ZERO:
            return f"{na} = 0"
        return f"{na} + 1 <= {nb}" if c else f"{na} <= {nb}"


class _Gen:
    def __init__(self, proc: Procedure, registry: OperatorRegistry, mode: str):
        self.registry = registry
        self.mode = mode
        self.names = ["0"]
        self.edges = []
        self.loops = []
        self.gamma = {x: self.var(f"G({x})") for x in proc.variables}

    def var(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1

    def le(self, a, b, c=0):
        if a != b or c:
            self.edges.append((a, b, c))

    def eq(self, a, b):
        self.le(a, b)
        self.le(b, a)

    def expr(self, e, kin, kout) -> int:
        if isinstance(e, Var):
            return self.gamma[e.name]
        if isinstance(e, OracleCall):
            d = self.expr(e.data, kin, kout)
            b = self.expr(e.bound, kin, kout)
            self.eq(b, kout)
            self.le(d, kin, 1)
            self.le(d, kout)
            return d
        op = self.registry.get(e.op)
        t = self.var(f"{e.op}@{e.span}" if e.span else e.op)
        for a in e.args:
            ai = self.expr(a, kin, kout)
            self.le(t, ai)
            self.le(ai, kin)
        if op.positive and e.args:
            self.le(t, kin, 1)
        return t

    def stmt(self, st, kin, kout) -> int:
        if isinstance(st, Seq):
            t = self.var("seq")
            for child in seq_items(st):
                self.le(self.stmt(child, kin, kout), t)
            return t
        if isinstance(st, Skip):
            return 0
        if isinstance(st, Assign):
            g = self.gamma[st.target]
            self.le(g, self.expr(st.expr, kin, kout))
            return g
        if isinstance(st, If):
            g = self.expr(st.cond, kin, kout)
            self.le(self.stmt(st.then, kin, kout), g)
            self.le(self.stmt(st.orelse, kin, kout), g)
            return g
        if isinstance(st, While):
            if kout == 0:
                k = self.var(f"while@{st.span}")
                self.eq(self.expr(st.cond, kin, k), k)
                self.le(self.stmt(st.body, k, k), k)
                self.le(0, k, 1)
                self.loops.append((st, WINIT, k))
                return k
            k = self.expr(st.cond, kin, kout)
            self.le(self.stmt(st.body, k, kout), k)
            self.le(0, k, 1)
            self.le(k, kout)
            self.loops.append((st, WH, k))
            return k
        raise TypeError(st)


def gen_constraints(proc: Procedure, registry: OperatorRegistry = DEFAULT_REGISTRY,
                    mode: str = WH) -> ConstraintSet:
    g = _Gen(proc, registry, mode)
    K, KIN = g.var("k"), g.var("k_in")
    KOUT = 0 if mode == WINIT else g.var("k_out")
    g.le(g.stmt(proc.body, KIN, KOUT), K)
    return ConstraintSet(g.names, g.edges, g.gamma, K, KIN, KOUT, mode, g.loops)


def count_whiles(st) -> int:
    return sum(isinstance(n, While) for n in iter_stmts(st))


def solve(cs: ConstraintSet, kmax: int):
    """Pointwise-least solution within [0, kmax], or Unsat with a witness chain."""
    n = len(cs.names)
    adj = [[] for _ in range(n)]
    for a, b, c in cs.edges:
        adj[a].append((b, c))
    dist = [0] * n
    pred = [-1] * n
    queue = deque(range(n))
    queued = [True] * n
    while queue:
        u = queue.popleft()
        queued[u] = False
        du = dist[u]
        for v, c in adj[u]:
            if du + c > dist[v]:
                dist[v] = du + c
                pred[v] = u
                if v == cs.ZERO or dist[v] > kmax:
                    return _unsat(cs, v, pred, kmax)
                if not queued[v]:
                    queued[v] = True
                    queue.append(v)
    values = {cs.names[i]: dist[i] for i in range(n)}
    gamma = {x: dist[i] for x, i in cs.gamma.items()}
    triple = TierTriple(dist[cs.K], dist[cs.KIN], dist[cs.KOUT])
    loops = [(w.span, rule, dist[k]) for w, rule, k in cs.loops]
    return ProcTyping(gamma, triple, cs.mode, values, loops)


def _unsat(cs: ConstraintSet, v: int, pred: list, kmax: int) -> Unsat:
    chain, seen = [v], {v}
    u = pred[v]
    while u != -1 and u not in seen:
        chain.append(u)
        seen.add(u)
        u = pred[u]
    if u != -1:
        # pred pointers lead back into the chain: keep only the cycle, closed at u
        chain = chain[chain.index(u):]
        chain.reverse()
        chain.append(chain[0])
        kind = "cycle"
    else:
        kind = "chain"
        chain.reverse()
    witness = [cs.names[i] for i in chain]
    if v == cs.ZERO:
        reason = f"{cs.mode}: outermost tier 0 forced above 0 via {kind} " + " -> ".join(witness)
    else:
        reason = f"{cs.mode}: {cs.names[v]} exceeds max tier {kmax} via {kind} " + " -> ".join(witness)
    return Unsat(reason, witness)


def infer_procedure(proc: Procedure, registry: OperatorRegistry = DEFAULT_REGISTRY,
                    kmax: int | None = None):
    """Try the initialising case first, then the standard one."""
    if kmax is None:
        kmax = count_whiles(proc.body) + 2
    if registry.restricted():
        return brute_force(proc, kmax, registry)
    first = solve(gen_constraints(proc, registry, WINIT), kmax)
    if first:
        return first
    second = solve(gen_constraints(proc, registry, WH), kmax)
    if second:
        return second
    return Unsat(f"{first.reason}; {second.reason}", first.witness + ["|"] + second.witness)


# --- rule replay -------------------------------------------------------------------

class _Replay:
    """Bottom-up derivability with a fixed variable environment."""

    def __init__(self, gamma: dict, registry: OperatorRegistry, bound: int):
        self.gamma = gamma
        self.registry = registry
        self.B = bound
        self.memo = {}

    def expr(self, e, kin, kout) -> frozenset:
        if isinstance(e, Var):
            return frozenset([self.gamma[e.name]])
        if isinstance(e, OracleCall):
            if kout not in self.expr(e.bound, kin, kout):
                return frozenset()
            return frozenset(k for k in self.expr(e.data, kin, kout) if k < kin and k <= kout)
        op = self.registry.get(e.op)
        args = [self.expr(a, kin, kout) for a in e.args]
        if op.signatures is not None:
            return frozenset(s[-1] for s in op.signatures.get(kin, ())
                             if all(t in A for t, A in zip(s[:-1], args)))
        if not args:
            return frozenset(range(self.B + 1))
        tops = []
        for A in args:
            ok = [a for a in A if a <= kin]
            if not ok:
                return frozenset()
            tops.append(max(ok))
        m = min(tops)
        if op.positive:
            m = min(m, kin - 1)
        return frozenset(range(m + 1))

    def stmt(self, st, kin, kout):
        """Least derivable tier of ``st`` (subsumption closes upward), or None."""
        key = (id(st), kin, kout)
        if key in self.memo:
            return self.memo[key]
        out = self._stmt(st, kin, kout)
        self.memo[key] = out
        return out

    def _stmt(self, st, kin, kout):
        if isinstance(st, Skip):
            return 0
        if isinstance(st, Seq):
            best = 0
            for child in seq_items(st):
                m = self.stmt(child, kin, kout)
                if m is None:
                    return None
                best = max(best, m)
            return best
        if isinstance(st, Assign):
            g = self.gamma[st.target]
            return g if any(g <= k for k in self.expr(st.expr, kin, kout)) else None
        if isinstance(st, If):
            m1, m0 = self.stmt(st.then, kin, kout), self.stmt(st.orelse, kin, kout)
            if m1 is None or m0 is None:
                return None
            ok = [k for k in self.expr(st.cond, kin, kout) if k >= max(m1, m0)]
            return min(ok, default=None)
        if isinstance(st, While):
            if kout == 0:
                for k in range(1, self.B + 1):
                    if k in self.expr(st.cond, kin, k):
                        m = self.stmt(st.body, k, k)
                        if m is not None and m <= k:
                            return k
                return None
            guard = self.expr(st.cond, kin, kout)
            for k in range(1, kout + 1):
                if k in guard:
                    m = self.stmt(st.body, k, kout)
                    if m is not None and m <= k:
                        return k
            return None
        raise TypeError(st)


def _depth(st) -> int:
    best, stack = 0, [(st, 0)]
    while stack:
        node, d = stack.pop()
        best = max(best, d)
        if isinstance(node, Seq):
            stack.extend((c, d) for c in seq_items(node))
        elif isinstance(node, If):
            stack.extend([(node.then, d + 1), (node.orelse, d + 1)])
        elif isinstance(node, While):
            stack.append((node.body, d + 1))
    return best


def min_tier(proc: Procedure, gamma: dict, kin: int, kout: int,
             registry: OperatorRegistry = DEFAULT_REGISTRY, bound: int | None = None):
    if bound is None:
        bound = max([*gamma.values(), kin, kout, 0]) + _depth(proc.body) + 2
    return _Replay(gamma, registry, bound).stmt(proc.body, kin, kout)


def verify_typing(proc: Procedure, gamma: dict, triple: TierTriple,
                  registry: OperatorRegistry = DEFAULT_REGISTRY) -> bool:
    """Is there a derivation of ``gamma |- body : triple``?"""
    if set(gamma) < set(proc.variables) or any(t < 0 for t in gamma.values()):
        return False
    if min(triple.as_list()) < 0:
        return False
    bound = max([*gamma.values(), *triple.as_list()]) + _depth(proc.body) + 2
    m = min_tier(proc, gamma, triple.kin, triple.kout, registry, bound)
    return m is not None and m <= triple.k


def brute_force(proc: Procedure, kmax: int, registry: OperatorRegistry = DEFAULT_REGISTRY):
    """Exhaustive search over environments and triples in [0, kmax]."""
    xs = list(proc.variables)
    bound = kmax + _depth(proc.body) + 2
    for kout in range(kmax + 1):
        for tiers in itertools.product(range(kmax + 1), repeat=len(xs)):
            gamma = dict(zip(xs, tiers))
            replay = _Replay(gamma, registry, bound)
            for kin in range(kmax + 1):
                m = replay.stmt(proc.body, kin, kout)
                if m is not None and m <= kmax:
                    return ProcTyping(gamma, TierTriple(m, kin, kout), "brute-force")
    return Unsat(f"no environment with tiers <= {kmax}")


# --- programs ------------------------------------------------------------------------

SAFE0, SAFE, NOT_SAFE = "SAFE0", "SAFE", "NotSafe"


@dataclass
class SafeReport:
    simple_type: str | None
    rank: int | None
    procedures: dict  # name -> ProcTyping | Unsat
    verdict: str
    diagnostics: list = field(default_factory=list)


def check_safe(prg: Program, registry: OperatorRegistry = DEFAULT_REGISTRY,
               kmax: int | None = None) -> SafeReport:
    from .simple_types import ORACLE, WORD, TypeError_, compute_rank, infer_simple

    diags = [str(d) for d in check_well_formed(prg, registry)]
    if diags:
        return SafeReport(None, None, {}, NOT_SAFE, diags)
    prg = normalize(prg)
    try:
        typing = infer_simple(prg)
    except TypeError_ as exc:
        return SafeReport(None, None, {}, NOT_SAFE, [f"simple typing: {exc}"])
    ty = typing.program_type
    shape = [typing.env[n] for n, _ in prg.boxed_vars]
    if shape != sorted(shape, key=lambda t: t != ORACLE) or any(t not in (ORACLE, WORD) for t in shape):
        diags.append("program type is not (W -> W)^k -> W^l -> W")
    rank = compute_rank(prg, typing)
    procs = {p.name: infer_procedure(p, registry, kmax) for p in prg.procedures}
    if diags or not all(procs.values()):
        verdict = NOT_SAFE
    else:
        verdict = SAFE0 if rank == 0 else SAFE
    return SafeReport(str(ty), rank, procs, verdict, diags)
