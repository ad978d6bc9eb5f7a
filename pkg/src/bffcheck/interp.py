"""Big-step evaluator with oracles, closures and call-by-name terms.

Statements thread a store; a procedure call copies the caller's store,
binds parameters and zeroes locals, so callers never observe a call's
assignments.  A closure body passed for an oracle parameter runs under
the callee's current store extended at the closure parameter.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .syntax import (App, Assign, Call, Closure, If, Lambda, OpApp, OracleCall, Procedure, Program,
                     Seq, Skip, TVar, Var, While, free_vars)
from .words import DEFAULT_REGISTRY, ArityMismatch, OperatorRegistry, restrict

DEFAULT_FUEL = 10 ** 6


class EvalError(Exception):
    kind = "EvalError"


class UnboundVariable(EvalError):
    kind = "UnboundVariable"


class FuelExhausted(EvalError):
    kind = "FuelExhausted"


class GuardNotBoolean(EvalError):
    kind = "GuardNotBoolean"


class StuckTerm(EvalError):
    kind = "StuckTerm"


class InputArityMismatch(EvalError):
    kind = "ArityMismatch"


@dataclass
class OracleFn:
    name: str
    fn: Callable[[str], str] = field(repr=False)
    memo: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, w: str) -> str:
        try:
            return self.memo[w]
        except KeyError:
            out = self.memo[w] = self.fn(w)
            return out


@dataclass
class Fuel:
    remaining: int = DEFAULT_FUEL

    def tick(self, n: int = 1):
        self.remaining -= n
        if self.remaining < 0:
            raise FuelExhausted("step budget exhausted")


@dataclass
class Store:
    words: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict)

    def copy(self) -> "Store":
        return Store(dict(self.words), dict(self.oracles))

    def word(self, x: str) -> str:
        try:
            return self.words[x]
        except KeyError:
            raise UnboundVariable(x) from None

    def oracle(self, x: str) -> OracleFn:
        try:
            return self.oracles[x]
        except KeyError:
            raise UnboundVariable(x) from None

    def updated(self, **words: str) -> "Store":
        out = self.copy()
        out.words.update(words)
        return out


Continuation = Mapping[str, Closure]


@dataclass
class Machine:
    """Procedure table, operator registry and fuel shared by one run."""
    decls: Mapping[str, Procedure]
    registry: OperatorRegistry = DEFAULT_REGISTRY
    fuel: Fuel = field(default_factory=Fuel)
    rank0: bool = False

    # expressions
    def expr(self, mu: Store, phi: Continuation, e) -> str:
        if isinstance(e, Var):
            return mu.word(e.name)
        if isinstance(e, OpApp):
            op = self.registry.get(e.op)
            if op.arity != len(e.args):
                raise ArityMismatch(f"{e.op} expects {op.arity} arguments")
            return op.semantics(*(self.expr(mu, phi, a) for a in e.args))
        if isinstance(e, OracleCall):
            v = self.expr(mu, phi, e.data)
            u = self.expr(mu, phi, e.bound)
            try:
                c = phi[e.oracle]
            except KeyError:
                raise UnboundVariable(e.oracle) from None
            self.fuel.tick()
            inner = mu.copy()
            inner.words[c.param] = restrict(v, u)
            return self.term(inner, c.body)
        raise StuckTerm(f"not an expression: {e!r}")

    def guard(self, mu, phi, e) -> bool:
        w = self.expr(mu, phi, e)
        if w not in ("0", "1"):
            raise GuardNotBoolean(f"guard evaluated to {w!r}")
        return w == "1"

    # statements; ``mu`` is owned by the activation and updated in place
    def stmt(self, mu: Store, phi: Continuation, st) -> Store:
        stack = [st]
        while stack:
            node = stack.pop()
            if isinstance(node, Seq):
                stack.append(node.second)
                stack.append(node.first)
                continue
            self.fuel.tick()
            if isinstance(node, Skip):
                pass
            elif isinstance(node, Assign):
                mu.words[node.target] = self.expr(mu, phi, node.expr)
            elif isinstance(node, If):
                stack.append(node.then if self.guard(mu, phi, node.cond) else node.orelse)
            elif isinstance(node, While):
                if self.guard(mu, phi, node.cond):
                    stack.append(node)
                    stack.append(node.body)
            else:
                raise StuckTerm(f"not a statement: {node!r}")
        return mu

    # terms
    def whnf(self, t):
        """Call-by-name reduction to a variable, lambda, ``X @ t`` or call."""
        spine = []
        while True:
            if isinstance(t, App):
                spine.append(t.arg)
                t = t.fn
            elif isinstance(t, Lambda) and spine:
                self.fuel.tick()
                t = substitute(t.body, t.param, spine.pop())
            else:
                break
        if not spine:
            return t
        if isinstance(t, TVar) and len(spine) == 1:
            return App(t, spine[0])
        raise StuckTerm("application does not reduce to a value")

    def term(self, mu: Store, t) -> str:
        if self.rank0:
            return self._term0(mu, t)
        v = self.whnf(t)
        if isinstance(v, TVar):
            return mu.word(v.name)
        if isinstance(v, App):
            f = mu.oracle(v.fn.name)
            w = self.term(mu, v.arg)
            self.fuel.tick()
            return f(w)
        if isinstance(v, Call):
            return self.call(mu, v)
        raise StuckTerm("term of higher type in word position")

    def _term0(self, mu: Store, t) -> str:
        if isinstance(t, TVar):
            return mu.word(t.name)
        if isinstance(t, App) and isinstance(t.fn, TVar):
            w = self._term0(mu, t.arg)
            self.fuel.tick()
            return mu.oracle(t.fn.name)(w)
        if isinstance(t, Call):
            return self.call(mu, t)
        raise StuckTerm("not a rank-0 term")

    def call(self, mu: Store, c: Call) -> str:
        try:
            p = self.decls[c.proc]
        except KeyError:
            raise UnboundVariable(c.proc) from None
        if len(c.args) != len(p.word_params) or len(c.closures) != len(p.oracle_params):
            raise InputArityMismatch(f"call to {p.name} has wrong arity")
        ws = [self.term(mu, a) for a in c.args]
        callee = mu.copy()
        callee.words.update(zip(p.word_params, ws))
        callee.words.update((y, "") for y in p.locals)
        phi = dict(zip(p.oracle_params, c.closures))
        out = self.stmt(callee, phi, p.body)
        return out.word(p.ret)


# --- capture-avoiding substitution ------------------------------------------------

_fresh = itertools.count()


def _fresh_name(base: str, avoid: set) -> str:
    while True:
        name = f"{base}_{next(_fresh)}"
        if name not in avoid:
            return name


def substitute(t, a: str, s):
    """``t[s/a]`` on terms and closures, renaming binders that would capture."""
    if isinstance(t, TVar):
        return s if t.name == a else t
    if isinstance(t, App):
        return App(substitute(t.fn, a, s), substitute(t.arg, a, s), t.span)
    if isinstance(t, Call):
        return Call(t.proc, tuple(substitute(c, a, s) for c in t.closures),
                    tuple(substitute(x, a, s) for x in t.args), t.span)
    if isinstance(t, (Lambda, Closure)):
        if t.param == a or a not in free_vars(t.body):
            return t
        param, body = t.param, t.body
        fs = free_vars(s)
        if param in fs:
            new = _fresh_name(param, fs | free_vars(body))
            body = substitute(body, param, TVar(new))
            param = new
        return type(t)(param, substitute(body, a, s), t.span)
    raise TypeError(t)


# --- programs ------------------------------------------------------------------------

def eval_expr(decls, mu: Store, phi: Continuation, e, fuel: Fuel | None = None,
              registry: OperatorRegistry = DEFAULT_REGISTRY) -> str:
    return Machine(_table(decls), registry, fuel or Fuel()).expr(mu, phi, e)


def eval_stmt(decls, mu: Store, phi: Continuation, st, fuel: Fuel | None = None,
              registry: OperatorRegistry = DEFAULT_REGISTRY) -> Store:
    return Machine(_table(decls), registry, fuel or Fuel()).stmt(mu.copy(), phi, st)


def eval_term(decls, mu: Store, t, fuel: Fuel | None = None,
              registry: OperatorRegistry = DEFAULT_REGISTRY, rank0: bool = False) -> str:
    return Machine(_table(decls), registry, fuel or Fuel(), rank0).term(mu, t)


def _table(decls) -> dict:
    if isinstance(decls, Mapping):
        return dict(decls)
    return {p.name: p for p in decls}


def run_program(prg: Program, oracles, words, fuel: int | Fuel = DEFAULT_FUEL,
                registry: OperatorRegistry = DEFAULT_REGISTRY, rank0: bool = False) -> str:
    """Feed the boxed inputs, then evaluate the main term."""
    oracles, words = list(oracles), list(words)
    if len(oracles) != len(prg.oracle_inputs) or len(words) != len(prg.word_inputs):
        raise InputArityMismatch(
            f"program expects {len(prg.oracle_inputs)} oracles and {len(prg.word_inputs)} words, "
            f"got {len(oracles)} and {len(words)}")
    mu = Store()
    mu.oracles.update(zip(prg.oracle_inputs, (o if isinstance(o, OracleFn) else OracleFn(str(o), o)
                                              for o in oracles)))
    mu.words.update(zip(prg.word_inputs, words))
    fuel = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    return Machine(_table(prg.procedures), registry, fuel, rank0).term(mu, prg.main)


# --- oracle spec mini-language -----------------------------------------------------------

class OracleSpecError(ValueError):
    pass


def _split_args(body: str) -> list[str]:
    depth, cur, out = 0, "", []
    for ch in body:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    out.append(cur)
    return [s.strip() for s in out]


def parse_oracle(spec: str, alphabet: str = "01") -> OracleFn:
    """``id``, ``const:w``, ``prepend:w``, ``reverse``, ``dup``, ``lenones``, ``compose(a,b)``.

    ``compose(a,b)`` applies ``b`` first, then ``a``.
    """
    spec = spec.strip()

    def word(w):
        w = "" if w in ("~", '""') else w.strip('"')
        if any(c not in alphabet for c in w):
            raise OracleSpecError(f"{w!r} is not a word over {alphabet!r}")
        return w

    if spec == "id":
        return OracleFn(spec, lambda w: w)
    if spec == "reverse":
        return OracleFn(spec, lambda w: w[::-1])
    if spec == "dup":
        return OracleFn(spec, lambda w: w + w)
    if spec == "lenones":
        return OracleFn(spec, lambda w: "1" * len(w))
    if spec.startswith("const:"):
        c = word(spec[6:])
        return OracleFn(spec, lambda w: c)
    if spec.startswith("prepend:"):
        c = word(spec[8:])
        return OracleFn(spec, lambda w: c + w)
    if spec.startswith("compose(") and spec.endswith(")"):
        parts = _split_args(spec[8:-1])
        if len(parts) != 2:
            raise OracleSpecError(f"compose takes two oracles: {spec}")
        f, g = (parse_oracle(p, alphabet) for p in parts)
        return OracleFn(spec, lambda w: f(g(w)))
    raise OracleSpecError(f"unknown oracle spec {spec!r}")


BUILTIN_ORACLES = ("id", "const:1", "prepend:1", "reverse", "dup", "lenones", "compose(prepend:1,reverse)")
