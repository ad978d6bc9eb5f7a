"""Simple types W and arrows: unification-based inference, replay and rank."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .syntax import App, Box, Call, Closure, Lambda, Program, TVar, is_type1, iter_terms


@dataclass(frozen=True)
class W:
    def __str__(self):
        return "W"


@dataclass(frozen=True)
class Arrow:
    src: object
    dst: object

    def __str__(self):
        s = str(self.src)
        if isinstance(self.src, Arrow):
            s = f"({s})"
        return f"{s} -> {self.dst}"


WORD = W()
ORACLE = Arrow(WORD, WORD)


def order(t) -> int:
    if isinstance(t, Arrow):
        return max(1 + order(t.src), order(t.dst))
    return 0


class TypeError_(Exception):
    """Two types that had to be equal are not."""

    def __init__(self, left, right, span=None):
        super().__init__(f"cannot unify {left} with {right}" + (f" at {span}" if span else ""))
        self.left, self.right, self.span = left, right, span


class OccursCheck(TypeError_):
    pass


# --- unification -----------------------------------------------------------------

_ids = itertools.count()


@dataclass(eq=False)
class TyVar:
    id: int = field(default_factory=lambda: next(_ids))
    ref: object = None

    def __str__(self):
        return f"t{self.id}"


def find(t):
    while isinstance(t, TyVar) and t.ref is not None:
        t = t.ref
    return t


def _occurs(v: TyVar, t) -> bool:
    t = find(t)
    if t is v:
        return True
    if isinstance(t, Arrow):
        return _occurs(v, t.src) or _occurs(v, t.dst)
    return False


def unify(a, b, span=None):
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = find(x), find(y)
        if x is y:
            continue
        if isinstance(x, TyVar):
            if _occurs(x, y):
                raise OccursCheck(resolve(x), resolve(y), span)
            x.ref = y
        elif isinstance(y, TyVar):
            stack.append((y, x))
        elif isinstance(x, Arrow) and isinstance(y, Arrow):
            stack.append((x.src, y.src))
            stack.append((x.dst, y.dst))
        elif x != y:
            raise TypeError_(resolve(x), resolve(y), span)


def resolve(t, default=WORD):
    """Fully substitute; unconstrained variables become ``default``."""
    t = find(t)
    if isinstance(t, TyVar):
        return default if default is not None else t
    if isinstance(t, Arrow):
        return Arrow(resolve(t.src, default), resolve(t.dst, default))
    return t


def arrows(srcs, dst):
    for s in reversed(srcs):
        dst = Arrow(s, dst)
    return dst


# --- inference ---------------------------------------------------------------------

@dataclass
class SimpleTyping:
    program_type: object
    env: dict  # boxed variable -> type
    nodes: dict  # id(term node) -> (node, type)

    def type_of(self, node):
        return self.nodes[id(node)][1]


def _proc_type(p):
    return arrows([ORACLE] * len(p.oracle_params) + [WORD] * len(p.word_params), WORD)


def infer_simple(prg: Program) -> SimpleTyping:
    """Annotate every term node with a monomorphic type.

    Boxed uppercase inputs are ``W->W``, lowercase ones ``W``.  Lambda
    binders get fresh variables solved globally; leftovers default to W.
    """
    procs = {p.name: p for p in prg.procedures}
    env = {}
    for layer in prg.layers:
        if isinstance(layer, Box):
            for n in layer.names:
                env[n] = ORACLE if is_type1(n) else WORD
    raw: dict = {}

    def infer(t, scope):
        # explicit stack to survive deeply nested terms
        result = {}
        stack = [(t, scope, False)]
        while stack:
            node, sc, done = stack.pop()
            if isinstance(node, TVar):
                if node.name not in sc:
                    raise TypeError_(node.name, "unbound", node.span)
                ty = sc[node.name]
            elif not done:
                stack.append((node, sc, True))
                if isinstance(node, Lambda):
                    v = TyVar()
                    raw[("binder", id(node))] = v
                    stack.append((node.body, {**sc, node.param: v}, False))
                elif isinstance(node, Closure):
                    stack.append((node.body, {**sc, node.param: WORD}, False))
                elif isinstance(node, App):
                    stack.append((node.fn, sc, False))
                    stack.append((node.arg, sc, False))
                elif isinstance(node, Call):
                    for c in node.closures:
                        stack.append((c, sc, False))
                    for a in node.args:
                        stack.append((a, sc, False))
                else:
                    raise TypeError(node)
                continue
            elif isinstance(node, Lambda):
                ty = Arrow(raw[("binder", id(node))], result[id(node.body)])
            elif isinstance(node, Closure):
                unify(result[id(node.body)], WORD, node.span)
                ty = ORACLE
            elif isinstance(node, App):
                ty = TyVar()
                unify(result[id(node.fn)], Arrow(result[id(node.arg)], ty), node.span)
            else:
                p = procs.get(node.proc)
                if p is None:
                    raise TypeError_(node.proc, "undeclared procedure", node.span)
                if len(node.closures) != len(p.oracle_params) or len(node.args) != len(p.word_params):
                    raise TypeError_(_proc_type(p), f"call with {len(node.closures)}+{len(node.args)} arguments", node.span)
                for c in node.closures:
                    unify(result[id(c)], ORACLE, c.span)
                for a in node.args:
                    unify(result[id(a)], WORD, a.span)
                ty = WORD
            result[id(node)] = ty
            raw[id(node)] = (node, ty)
        return result[id(t)]

    main_ty = infer(prg.main, dict(env))
    unify(main_ty, WORD, prg.main.span)
    nodes = {k: (n, resolve(ty)) for k, (n, ty) in ((k, v) for k, v in raw.items() if not isinstance(k, tuple))}
    boxed = [n for layer in prg.layers if isinstance(layer, Box) for n in layer.names]
    prog_ty = arrows([env[n] for n in boxed], WORD)
    return SimpleTyping(prog_ty, env, nodes)


def replay_simple(prg: Program, typing: SimpleTyping) -> bool:
    """Check an annotation rule by rule, without inference."""
    procs = {p.name: p for p in prg.procedures}
    ok = True

    def check(t, scope) -> bool:
        stack = [(t, scope)]
        while stack:
            node, sc = stack.pop()
            ty = typing.type_of(node)
            if isinstance(node, TVar):
                if sc.get(node.name) != ty:
                    return False
            elif isinstance(node, Lambda):
                if not isinstance(ty, Arrow) or typing.type_of(node.body) != ty.dst:
                    return False
                stack.append((node.body, {**sc, node.param: ty.src}))
            elif isinstance(node, Closure):
                if ty != ORACLE or typing.type_of(node.body) != WORD:
                    return False
                stack.append((node.body, {**sc, node.param: WORD}))
            elif isinstance(node, App):
                if typing.type_of(node.fn) != Arrow(typing.type_of(node.arg), ty):
                    return False
                stack.extend([(node.fn, sc), (node.arg, sc)])
            elif isinstance(node, Call):
                p = procs.get(node.proc)
                if p is None or ty != WORD:
                    return False
                if len(node.closures) != len(p.oracle_params) or len(node.args) != len(p.word_params):
                    return False
                for c in node.closures:
                    if typing.type_of(c) != ORACLE:
                        return False
                    stack.append((c, sc))
                for a in node.args:
                    if typing.type_of(a) != WORD:
                        return False
                    stack.append((a, sc))
        return True

    ok = check(prg.main, dict(typing.env)) and typing.type_of(prg.main) == WORD
    return ok


def compute_rank(prg: Program, typing: SimpleTyping) -> int:
    return max((order(typing.type_of(n)) for n in iter_terms(prg.main) if isinstance(n, Lambda)), default=0)


def is_rank0(prg: Program) -> bool:
    return not any(isinstance(n, Lambda) for n in iter_terms(prg.main))
