import random

import pytest
from hypothesis import given, settings, strategies as st

from bffcheck.parser import (ParseFailure, lex, parse_expr, parse_program, parse_stmt, pretty,
                             pretty_expr, pretty_stmt)
from bffcheck.syntax import Closure, OpApp, OracleCall, Skip, Var, While
from conftest import CORPUS, load
from oracles import random_program


def kinds(text):
    return [(t.kind, t.text) for t in lex(text)][:-1]


def test_lex_oracle_call():
    assert kinds("x := X1(~ |> ~);") == [
        ("ident", "x"), ("punct", ":="), ("ident", "X1"), ("punct", "("), ("eps", "~"),
        ("punct", "|>"), ("eps", "~"), ("punct", ")"), ("punct", ";")]


def test_lex_operator_call():
    assert kinds("pred(v)") == [("ident", "pred"), ("punct", "("), ("ident", "v"), ("punct", ")")]


def test_lex_words_comments_keywords():
    assert kinds('"1001" // ignored\nwhile') == [("word", "1001"), ("keyword", "while")]


def test_lex_invalid_character():
    with pytest.raises(ParseFailure) as exc:
        lex("x := \x01")
    (err,) = exc.value.errors
    assert err.span.start == 5


def test_parse_ce(ce):
    (p,) = ce.procedures
    assert p.name == "KS"
    assert p.oracle_params == ("X1", "X2")
    assert p.word_params == ("v",)
    assert p.locals == ("u", "z")
    assert p.ret == "z"
    assert isinstance(p.body.second.second, While)


def test_truncated_input_reports_end():
    text = "while (v != "
    with pytest.raises(ParseFailure) as exc:
        parse_stmt(text)
    (err,) = exc.value.errors
    assert err.found == "end of input"
    assert err.span.start == len(text)


def test_oracle_parameters_precede_word_parameters():
    with pytest.raises(ParseFailure):
        parse_program("box [w] in declare P(x, Y) { skip; return x } in call P(w)")


def test_infix_and_literals():
    e = parse_expr('head(x) == "1"')
    assert e == OpApp("eqw", (OpApp("head", (Var("x"),)), OpApp('"1"')))
    assert pretty_expr(e) == 'head(x) == "1"'
    assert parse_expr("~") == OpApp("eps")
    assert parse_expr('""') == OpApp("eps")


def test_oracle_call_shape():
    assert parse_expr("X(lmin(u, x) |> x)") == OracleCall(
        "X", OpApp("lmin", (Var("u"), Var("x"))), Var("x"))


def test_bare_oracle_argument_is_eta_expanded():
    (c,) = parse_program("box [X, a] in declare P(Y, w) { skip; return w } in call P(X, a)").main.closures
    assert isinstance(c, Closure)
    assert pretty(parse_program("box [X, a] in declare P(Y, w) { skip; return w } in call P(X, a)")).count(
        "{x -> X @ x}") == 1


def test_if_without_else():
    st = parse_stmt("if (x != ~) { x := pred(x) }")
    assert st.orelse == Skip()


def test_pretty_skip_and_ce_text(ce):
    assert pretty_stmt(Skip()) == "skip"
    assert "call KS({x -> X @ x}" in pretty(ce)


def test_corpus_round_trip():
    for path in CORPUS.glob("*.bff"):
        prg = load(path.name)
        assert parse_program(pretty(prg)) == prg, path.name
        assert pretty(parse_program(pretty(prg))) == pretty(prg)


def test_random_round_trip_500():
    for seed in range(500):
        prg = random_program(random.Random(seed))
        assert parse_program(pretty(prg)) == prg, seed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_random_round_trip_property(seed):
    prg = random_program(random.Random(seed))
    assert parse_program(pretty(prg)) == prg


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 400))
def test_error_spans_within_bounds(cut):
    text = (CORPUS / "ce.bff").read_text()[:cut]
    try:
        parse_program(text)
    except ParseFailure as exc:
        for err in exc.errors:
            assert 0 <= err.span.start <= err.span.end <= len(text)
            assert err.expected
