"""Lexer, recursive-descent parser and pretty-printer for ``.bff`` sources.

Glyphs are written in ASCII: ``~`` for the empty word, ``|>`` for the
truncate-and-pad restriction, ``!=``/``==`` for the infix predicates and
``\\a. t`` for lambda abstraction.  Word literals are double-quoted, or
written as bare runs of digits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (App, Assign, Box, Call, Closure, Declare, If, Lambda, OpApp, OracleCall,
                     Procedure, Program, Skip, Span, TVar, Var, While, is_type1, seq,
                     seq_items)
from .words import INFIX, INFIX_OF, is_literal_name, literal_name

KEYWORDS = {"box", "declare", "in", "call", "while", "if", "else", "skip", "var", "return"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, word, eps, punct, eof
    text: str
    span: Span


@dataclass(frozen=True)
class ParseError:
    span: Span
    expected: str
    found: str

    def __str__(self):
        return f"{self.span}: expected {self.expected}, found {self.found!r}"


class ParseFailure(Exception):
    def __init__(self, errors: list[ParseError]):
        super().__init__("; ".join(map(str, errors)))
        self.errors = errors


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<word>"[^"\n]*")
  | (?P<digits>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>:=|->|\|>|!=|==|[(){}\[\],;@~\\.])
""", re.VERBOSE)


class _Lines:
    def __init__(self, text: str):
        self.starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def pos(self, offset: int) -> tuple[int, int]:
        lo, hi = 0, len(self.starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self.starts[lo] + 1


def _mkspan(lines: _Lines, start: int, end: int) -> Span:
    l1, c1 = lines.pos(start)
    l2, c2 = lines.pos(end)
    return Span(start, end, l1, c1, l2, c2)


def lex(text: str) -> list[Token]:
    lines = _Lines(text)
    out: list[Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            sp = _mkspan(lines, i, i + 1)
            raise ParseFailure([ParseError(sp, "a valid character", text[i])])
        kind, tok = m.lastgroup, m.group()
        sp = _mkspan(lines, m.start(), m.end())
        if kind in ("ws", "comment"):
            pass
        elif kind == "ident":
            out.append(Token("keyword" if tok in KEYWORDS else "ident", tok, sp))
        elif kind in ("word", "digits"):
            word = tok.strip('"')
            out.append(Token("word", word, sp) if word else Token("eps", "~", sp))
        elif tok == "~":
            out.append(Token("eps", tok, sp))
        else:
            out.append(Token("punct", tok, sp))
        i = m.end()
    out.append(Token("eof", "", _mkspan(lines, len(text), len(text))))
    return out


def _join(a: Span, b: Span) -> Span:
    return Span(a.start, b.end, a.line, a.col, b.end_line, b.end_col)


class _Parser:
    def __init__(self, text: str):
        self.toks = lex(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("punct", "keyword")

    def fail(self, expected: str):
        t = self.tok
        raise ParseFailure([ParseError(t.span, expected, t.text or "end of input")])

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(what)
        return self.advance()

    def names(self, close: str) -> list[str]:
        out = []
        if not self.at(close):
            out.append(self.ident().text)
            while self.accept(","):
                out.append(self.ident().text)
        return out

    # programs
    def program(self) -> Program:
        start = self.tok.span
        layers = []
        while True:
            if self.at("box"):
                s = self.advance().span
                self.expect("[")
                names = self.names("]")
                self.expect("]")
                layers.append(Box(tuple(names), _join(s, self.expect("in").span)))
            elif self.at("declare"):
                s = self.advance().span
                procs = [self.procedure()]
                while not self.at("in"):
                    procs.append(self.procedure())
                layers.append(Declare(tuple(procs), _join(s, self.expect("in").span)))
            else:
                break
        main = self.term()
        if self.tok.kind != "eof":
            self.fail("end of input")
        return Program(tuple(layers), main, _join(start, self.toks[self.i - 1].span))

    def procedure(self) -> Procedure:
        name = self.ident("procedure name")
        self.expect("(")
        params = self.names(")")
        self.expect(")")
        oracles = [p for p in params if is_type1(p)]
        if params[:len(oracles)] != oracles:
            raise ParseFailure([ParseError(name.span, "oracle parameters before word parameters",
                                           ", ".join(params))])
        self.expect("{")
        local = []
        if self.accept("var"):
            local = self.names(";")
            self.expect(";")
        body = self.stmts(("return",))
        self.expect("return")
        ret = self.ident().text
        self.accept(";")
        end = self.expect("}").span
        return Procedure(name.text, tuple(oracles), tuple(params[len(oracles):]), tuple(local),
                         body, ret, _join(name.span, end))

    # statements
    def stmts(self, stop: tuple) -> object:
        items = []
        while not any(self.at(s) for s in stop):
            st = self.stmt()
            items.append(st)
            if isinstance(st, (If, While)):
                self.accept(";")
            elif not self.accept(";") and not any(self.at(s) for s in stop):
                self.fail("';'")
        return seq(*items)

    def block(self):
        self.expect("{")
        body = self.stmts(("}",))
        end = self.expect("}").span
        return body, end

    def stmt(self):
        t = self.tok
        if self.accept("skip"):
            return Skip(t.span)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            body, end = self.block()
            return While(cond, body, _join(t.span, end))
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then, end = self.block()
            orelse = Skip()
            if self.accept("else"):
                orelse, end = self.block()
            return If(cond, then, orelse, _join(t.span, end))
        if t.kind == "ident":
            self.advance()
            self.expect(":=")
            e = self.expr()
            return Assign(t.text, e, _join(t.span, e.span))
        self.fail("a statement")

    # expressions
    def expr(self):
        left = self.primary()
        if self.tok.kind == "punct" and self.tok.text in INFIX:
            op = self.advance().text
            right = self.primary()
            return OpApp(INFIX[op], (left, right), _join(left.span, right.span))
        return left

    def primary(self):
        t = self.tok
        if t.kind == "eps":
            self.advance()
            return OpApp("eps", (), t.span)
        if t.kind == "word":
            self.advance()
            return OpApp(literal_name(t.text), (), t.span)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "ident":
            self.fail("an expression")
        self.advance()
        if not self.at("("):
            return Var(t.text, t.span)
        self.advance()
        if is_type1(t.text):
            data = self.expr()
            self.expect("|>")
            bound = self.expr()
            end = self.expect(")").span
            return OracleCall(t.text, data, bound, _join(t.span, end))
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        end = self.expect(")").span
        return OpApp(t.text, tuple(args), _join(t.span, end))

    # terms
    def term(self):
        if self.at("\\"):
            s = self.advance().span
            param = self.ident().text
            self.expect(".")
            body = self.term()
            return Lambda(param, body, _join(s, body.span))
        left = self.atom()
        while self.accept("@"):
            right = self.term() if self.at("\\") else self.atom()
            left = App(left, right, _join(left.span, right.span))
        return left

    def atom(self):
        t = self.tok
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        if self.accept("call"):
            name = self.ident("procedure name")
            self.expect("(")
            closures, args = [], []
            while not self.at(")"):
                if not args and self.at("{"):
                    closures.append(self.closure())
                elif not args and self.tok.kind == "ident" and is_type1(self.tok.text) \
                        and self.toks[self.i + 1].text in (",", ")"):
                    x = self.advance()
                    closures.append(Closure("x", App(TVar(x.text, x.span), TVar("x", x.span), x.span), x.span))
                else:
                    args.append(self.term())
                if not self.accept(","):
                    break
            end = self.expect(")").span
            return Call(name.text, tuple(closures), tuple(args), _join(t.span, end))
        if t.kind == "ident":
            self.advance()
            return TVar(t.text, t.span)
        self.fail("a term")

    def closure(self):
        s = self.expect("{").span
        param = self.ident().text
        self.expect("->")
        body = self.term()
        end = self.expect("}").span
        return Closure(param, body, _join(s, end))


def parse_program(text: str) -> Program:
    """Parse a whole program; raises ParseFailure with spans on error."""
    return _Parser(text).program()


def parse_term(text: str):
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return t


def parse_stmt(text: str):
    p = _Parser(text)
    items = []
    while p.tok.kind != "eof":
        items.append(p.stmt())
        if p.tok.kind != "eof" and not p.accept(";") and not isinstance(items[-1], (If, While)):
            p.fail("';'")
    return seq(*items)


def parse_expr(text: str):
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return e


# --- pretty printing ---------------------------------------------------------------

def pretty_expr(e) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, OracleCall):
        return f"{e.oracle}({pretty_expr(e.data)} |> {pretty_expr(e.bound)})"
    if e.op == "eps" and not e.args:
        return "~"
    if is_literal_name(e.op):
        return e.op
    if e.op in INFIX_OF and len(e.args) == 2:
        a, b = (f"({pretty_expr(x)})" if _is_infix(x) else pretty_expr(x) for x in e.args)
        return f"{a} {INFIX_OF[e.op]} {b}"
    return f"{e.op}({', '.join(map(pretty_expr, e.args))})"


def _is_infix(e) -> bool:
    return isinstance(e, OpApp) and e.op in INFIX_OF and len(e.args) == 2


def pretty_stmt(st, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    items = seq_items(st)
    for n, node in enumerate(items):
        sep = ";" if n < len(items) - 1 else ""
        if isinstance(node, Skip):
            lines.append(f"{pad}skip{sep}")
        elif isinstance(node, Assign):
            lines.append(f"{pad}{node.target} := {pretty_expr(node.expr)}{sep}")
        elif isinstance(node, While):
            lines.append(f"{pad}while ({pretty_expr(node.cond)}) {{")
            lines.append(pretty_stmt(node.body, indent + 1))
            lines.append(f"{pad}}}{sep}")
        elif isinstance(node, If):
            lines.append(f"{pad}if ({pretty_expr(node.cond)}) {{")
            lines.append(pretty_stmt(node.then, indent + 1))
            lines.append(f"{pad}}} else {{")
            lines.append(pretty_stmt(node.orelse, indent + 1))
            lines.append(f"{pad}}}{sep}")
    return "\n".join(lines)


def pretty_term(t) -> str:
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, Lambda):
        return f"\\{t.param}. {pretty_term(t.body)}"
    if isinstance(t, App):
        fn = pretty_term(t.fn)
        if isinstance(t.fn, Lambda):
            fn = f"({fn})"
        arg = pretty_term(t.arg)
        if isinstance(t.arg, (App, Lambda)):
            arg = f"({arg})"
        return f"{fn} @ {arg}"
    if isinstance(t, Call):
        parts = [pretty_closure(c) for c in t.closures] + [pretty_term(a) for a in t.args]
        return f"call {t.proc}({', '.join(parts)})"
    if isinstance(t, Closure):
        return pretty_closure(t)
    raise TypeError(t)


def pretty_closure(c: Closure) -> str:
    return f"{{{c.param} -> {pretty_term(c.body)}}}"


def pretty_procedure(p: Procedure, indent: int = 1) -> str:
    pad = "  " * indent
    params = ", ".join(p.oracle_params + p.word_params)
    lines = [f"{pad}{p.name}({params}) {{"]
    if p.locals:
        lines.append(f"{pad}  var {', '.join(p.locals)};")
    last = seq_items(p.body)[-1]
    lines.append(pretty_stmt(p.body, indent + 1) + ("" if isinstance(last, (If, While)) else ";"))
    lines.append(f"{pad}  return {p.ret}")
    lines.append(f"{pad}}}")
    return "\n".join(lines)


def pretty(prg: Program) -> str:
    lines = []
    for layer in prg.layers:
        if isinstance(layer, Box):
            lines.append(f"box [{', '.join(layer.names)}] in")
        else:
            lines.append("declare")
            lines.extend(pretty_procedure(p) for p in layer.procs)
            lines.append("in")
    lines.append("  " + pretty_term(prg.main))
    return "\n".join(lines) + "\n"
