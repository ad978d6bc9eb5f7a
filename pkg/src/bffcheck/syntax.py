"""Abstract syntax for second-order programs.

Case carries the variable kind: an identifier starting with an uppercase
letter is a type-1 (oracle) variable, anything else is a type-0 (word)
variable.  Lambda binders are the only place where a variable of higher
type may appear.  Spans never take part in equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .words import DEFAULT_REGISTRY, OperatorRegistry, UnknownOperator


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int = 1
    col: int = 1
    end_line: int = 1
    end_col: int = 1

    def __str__(self):
        return f"{self.line}:{self.col}"


def _span():
    return field(default=None, compare=False, repr=False)


def is_type1(name: str) -> bool:
    return name[:1].isupper()


# --- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class OpApp:
    op: str
    args: tuple = ()
    span: Span | None = _span()


@dataclass(frozen=True)
class OracleCall:
    oracle: str
    data: "Expr"
    bound: "Expr"
    span: Span | None = _span()


Expr = Union[Var, OpApp, OracleCall]


# --- statements ----------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    span: Span | None = _span()


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    second: "Stmt"
    span: Span | None = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"
    span: Span | None = _span()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    span: Span | None = _span()


Stmt = Union[Skip, Assign, Seq, If, While]


def seq(*stmts: Stmt) -> Stmt:
    """Right-nested sequence; the empty sequence is skip."""
    if not stmts:
        return Skip()
    out = stmts[-1]
    for st in reversed(stmts[:-1]):
        out = Seq(st, out)
    return out


def seq_items(st: Stmt) -> list[Stmt]:
    """Flatten nested sequences into their non-sequence parts (left to right)."""
    out, stack = [], [st]
    while stack:
        node = stack.pop()
        if isinstance(node, Seq):
            stack.append(node.second)
            stack.append(node.first)
        else:
            out.append(node)
    return out


# --- terms ---------------------------------------------------------------------

@dataclass(frozen=True)
class TVar:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Lambda:
    param: str
    body: "Term"
    span: Span | None = _span()


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    span: Span | None = _span()


@dataclass(frozen=True)
class Closure:
    param: str
    body: "Term"
    span: Span | None = _span()


@dataclass(frozen=True)
class Call:
    proc: str
    closures: tuple = ()
    args: tuple = ()
    span: Span | None = _span()


Term = Union[TVar, Lambda, App, Call]


# --- procedures and programs ---------------------------------------------------

@dataclass(frozen=True)
class Procedure:
    name: str
    oracle_params: tuple
    word_params: tuple
    locals: tuple
    body: Stmt
    ret: str
    span: Span | None = _span()

    @property
    def variables(self) -> tuple:
        return self.word_params + self.locals


@dataclass(frozen=True)
class Box:
    names: tuple
    span: Span | None = _span()


@dataclass(frozen=True)
class Declare:
    procs: tuple
    span: Span | None = _span()


@dataclass(frozen=True)
class Program:
    """``box``/``declare`` layers, outermost first, wrapped around a main term."""
    layers: tuple
    main: Term
    span: Span | None = _span()

    @property
    def boxed_vars(self) -> list[tuple[str, str]]:
        return [(n, "oracle-input" if is_type1(n) else "word-input")
                for layer in self.layers if isinstance(layer, Box) for n in layer.names]

    @property
    def oracle_inputs(self) -> list[str]:
        return [n for n, role in self.boxed_vars if role == "oracle-input"]

    @property
    def word_inputs(self) -> list[str]:
        return [n for n, role in self.boxed_vars if role == "word-input"]

    @property
    def procedures(self) -> list[Procedure]:
        return [p for layer in self.layers if isinstance(layer, Declare) for p in layer.procs]

    def procedure(self, name: str) -> Procedure:
        for p in self.procedures:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def normal_form(self) -> bool:
        kinds = [type(layer) for layer in self.layers]
        if kinds not in ([], [Box], [Declare], [Box, Declare]):
            return False
        if kinds and kinds[0] is Box:
            names = self.layers[0].names
            flags = [is_type1(n) for n in names]
            return flags == sorted(flags, reverse=True)
        return True


# --- traversal -----------------------------------------------------------------

def iter_exprs(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, OpApp):
            stack.extend(reversed(node.args))
        elif isinstance(node, OracleCall):
            stack.append(node.bound)
            stack.append(node.data)


def stmt_exprs(st: Stmt) -> Iterator[Expr]:
    """Top-level expressions of a statement tree (guards and right-hand sides)."""
    for node in iter_stmts(st):
        if isinstance(node, Assign):
            yield node.expr
        elif isinstance(node, (If, While)):
            yield node.cond


def iter_stmts(st: Stmt) -> Iterator[Stmt]:
    stack = [st]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Seq):
            stack.append(node.second)
            stack.append(node.first)
        elif isinstance(node, If):
            stack.append(node.orelse)
            stack.append(node.then)
        elif isinstance(node, While):
            stack.append(node.body)


def iter_terms(t) -> Iterator:
    """Every term and closure node reachable from ``t``."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Lambda, Closure)):
            stack.append(node.body)
        elif isinstance(node, App):
            stack.append(node.arg)
            stack.append(node.fn)
        elif isinstance(node, Call):
            stack.extend(reversed(node.args))
            stack.extend(reversed(node.closures))


def while_loops(st: Stmt) -> list[While]:
    return [n for n in iter_stmts(st) if isinstance(n, While)]


# --- free variables ------------------------------------------------------------

def free_vars(node) -> frozenset:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, OpApp):
        return frozenset().union(*map(free_vars, node.args))
    if isinstance(node, OracleCall):
        return frozenset([node.oracle]) | free_vars(node.data) | free_vars(node.bound)
    if isinstance(node, (Skip, Assign, Seq, If, While)):
        out = set()
        for n in iter_stmts(node):
            if isinstance(n, Assign):
                out.add(n.target)
        for e in stmt_exprs(node):
            out |= free_vars(e)
        return frozenset(out)
    if isinstance(node, TVar):
        return frozenset([node.name])
    if isinstance(node, (Lambda, Closure)):
        return free_vars(node.body) - {node.param}
    if isinstance(node, App):
        return free_vars(node.fn) | free_vars(node.arg)
    if isinstance(node, Call):
        return frozenset().union(*map(free_vars, node.closures), *map(free_vars, node.args))
    if isinstance(node, Procedure):
        return free_vars(node.body) - set(node.oracle_params) - set(node.variables)
    if isinstance(node, Program):
        out = set(free_vars(node.main))
        for layer in reversed(node.layers):
            if isinstance(layer, Box):
                out -= set(layer.names)
            else:
                for p in layer.procs:
                    out |= free_vars(p)
        return frozenset(out)
    raise TypeError(f"not an AST node: {node!r}")


# --- well-formedness -----------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    category: str
    message: str
    span: Span | None = None

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.category}: {self.message}"


def _check_expr(e: Expr, proc: Procedure, registry: OperatorRegistry, out: list):
    words, oracles = set(proc.variables), set(proc.oracle_params)
    for node in iter_exprs(e):
        if isinstance(node, Var):
            if is_type1(node.name):
                out.append(Diagnostic("kind", f"oracle variable {node.name} used as a word", node.span))
            elif node.name not in words:
                out.append(Diagnostic("free-variable", f"{node.name} is not a parameter or local of {proc.name}", node.span))
        elif isinstance(node, OracleCall):
            if node.oracle not in oracles:
                out.append(Diagnostic("free-variable", f"{node.oracle} is not an oracle parameter of {proc.name}", node.span))
        elif isinstance(node, OpApp):
            try:
                op = registry.get(node.op)
            except UnknownOperator:
                out.append(Diagnostic("unknown-operator", f"operator {node.op} is not registered", node.span))
                continue
            if op.arity != len(node.args):
                out.append(Diagnostic("arity", f"{node.op} expects {op.arity} arguments, got {len(node.args)}", node.span))


def _check_procedure(p: Procedure, registry, out: list):
    seen = set()
    for name in p.oracle_params:
        if not is_type1(name):
            out.append(Diagnostic("kind", f"oracle parameter {name} of {p.name} must be uppercase", p.span))
    for name in p.variables:
        if is_type1(name):
            out.append(Diagnostic("kind", f"word variable {name} of {p.name} must be lowercase", p.span))
    for name in p.oracle_params + p.variables:
        if name in seen:
            out.append(Diagnostic("name-clash", f"{name} declared twice in {p.name}", p.span))
        seen.add(name)
    if p.ret not in p.variables:
        out.append(Diagnostic("free-variable", f"return variable {p.ret} is not a parameter or local of {p.name}", p.span))
    for node in iter_stmts(p.body):
        if isinstance(node, Assign) and (node.target not in p.variables or is_type1(node.target)):
            out.append(Diagnostic("free-variable", f"assignment to undeclared {node.target} in {p.name}", node.span))
    for e in stmt_exprs(p.body):
        _check_expr(e, p, registry, out)


def _check_term(t, scope: set, procs: dict, out: list):
    stack = [(t, frozenset(scope))]
    while stack:
        node, bound = stack.pop()
        if isinstance(node, TVar):
            if node.name not in bound:
                out.append(Diagnostic("free-variable", f"{node.name} is not bound", node.span))
        elif isinstance(node, (Lambda, Closure)):
            if isinstance(node, Closure) and is_type1(node.param):
                out.append(Diagnostic("kind", f"closure parameter {node.param} must be a word variable", node.span))
            stack.append((node.body, bound | {node.param}))
        elif isinstance(node, App):
            stack.append((node.fn, bound))
            stack.append((node.arg, bound))
        elif isinstance(node, Call):
            p = procs.get(node.proc)
            if p is None:
                out.append(Diagnostic("unknown-procedure", f"no declaration for {node.proc}", node.span))
            else:
                if len(node.closures) != len(p.oracle_params):
                    out.append(Diagnostic("arity", f"{node.proc} expects {len(p.oracle_params)} closures, got {len(node.closures)}", node.span))
                if len(node.args) != len(p.word_params):
                    out.append(Diagnostic("arity", f"{node.proc} expects {len(p.word_params)} word arguments, got {len(node.args)}", node.span))
            for c in node.closures:
                stack.append((c, bound))
            for a in node.args:
                stack.append((a, bound))


def check_well_formed(prg: Program, registry: OperatorRegistry = DEFAULT_REGISTRY) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    scope: set = set()
    procs: dict = {}
    for layer in prg.layers:
        if isinstance(layer, Box):
            for name in layer.names:
                if name in scope:
                    out.append(Diagnostic("name-clash", f"input {name} boxed twice", layer.span))
                scope.add(name)
        else:
            for p in layer.procs:
                if p.name in procs:
                    out.append(Diagnostic("name-clash", f"procedure {p.name} declared twice", p.span))
                procs[p.name] = p
                _check_procedure(p, registry, out)
    _check_term(prg.main, scope, procs, out)
    return out


# --- normal form ---------------------------------------------------------------

class NotClosed(ValueError):
    pass


def normalize(prg: Program) -> Program:
    """Commute all boxes (type-1 first, then type-0) ahead of a single declare."""
    fv = free_vars(prg)
    if fv:
        raise NotClosed(f"free variables: {', '.join(sorted(fv))}")
    names = [n for layer in prg.layers if isinstance(layer, Box) for n in layer.names]
    ordered = [n for n in names if is_type1(n)] + [n for n in names if not is_type1(n)]
    procs = tuple(prg.procedures)
    layers = []
    if ordered:
        layers.append(Box(tuple(ordered)))
    if procs:
        layers.append(Declare(procs))
    if prg.normal_form and len(layers) == len(prg.layers):
        return prg
    return Program(tuple(layers), prg.main, prg.span)
