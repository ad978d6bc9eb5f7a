import itertools

import pytest

from bffcheck.interp import BUILTIN_ORACLES, parse_oracle, run_program
from bffcheck.parser import parse_program, parse_term
from bffcheck.syntax import (Assign, Box, Declare, NotClosed, Program, Seq, Skip, free_vars,
                             check_well_formed, normalize, seq, seq_items)
from conftest import CORPUS, load
from oracles import words_upto


def categories(src):
    return [d.category for d in check_well_formed(parse_program(src))]


def test_ce_is_well_formed(ce):
    assert check_well_formed(ce) == []


def test_all_corpus_programs_are_closed():
    for path in CORPUS.glob("*.bff"):
        prg = load(path.name)
        assert check_well_formed(prg) == [], path.name
        assert free_vars(prg) == frozenset(), path.name


def test_duplicate_procedure_names():
    src = """box [w] in declare
      P(x) { skip; return x }
      P(y) { skip; return y }
    in call P(w)"""
    assert categories(src) == ["name-clash"]


def test_free_variable_in_body():
    src = "box [w] in declare P(x) { x := y; return x } in call P(w)"
    assert categories(src) == ["free-variable"]


def test_unknown_procedure_and_operator():
    assert "unknown-procedure" in categories("box [w] in call Q(w)")
    assert "unknown-operator" in categories("box [w] in declare P(x) { x := zap(x); return x } in call P(w)")
    assert "arity" in categories("box [w] in declare P(x) { x := pred(x, x); return x } in call P(w)")


def test_return_must_be_declared():
    assert categories("box [w] in declare P(x) { skip; return q } in call P(w)")


def test_spans_point_into_the_source():
    src = "box [w] in declare P(x) { x := y; return x } in call P(w)"
    (d,) = check_well_formed(parse_program(src))
    assert src[d.span.start:d.span.end] == "y"


@pytest.mark.parametrize("text,fv", [
    ("{x -> X @ x}", {"X"}),
    ("\\a. a", set()),
    ("call KS({x -> X @ x}, y)", {"X", "y"}),
])
def test_free_vars_of_terms(text, fv):
    if text.startswith("{"):
        t = parse_term(f"call P({text})").closures[0]
    else:
        t = parse_term(text)
    assert free_vars(t) == fv


def test_free_vars_at_program_level(ce):
    assert free_vars(ce) == frozenset()
    assert free_vars(ce.main) == {"X", "y"}


def test_seq_is_right_nested():
    a, b, c = Assign("x", None), Assign("y", None), Skip()
    s = seq(a, b, c)
    assert isinstance(s, Seq) and isinstance(s.second, Seq)
    assert seq_items(seq(seq(a, b), c)) == [a, b, c]


NESTED = """
box [X] in declare P(x, y) { x := pred(y); return x } in box [y] in call P(X @ y, y)
"""

DECLARE_FIRST = """
declare P(x, y) { while (y != ~) { y := pred(y); x := suc1(x) }; return x }
in box [X, y] in call P(X @ y, y)
"""


def test_normalize_commutes_boxes_forward():
    prg = parse_program(NESTED)
    assert not prg.normal_form
    n = normalize(prg)
    assert n.normal_form
    assert [type(layer) for layer in n.layers] == [Box, Declare]
    assert n.layers[0].names == ("X", "y")


def test_normalize_fixpoint(ce):
    assert normalize(ce) is ce
    n = normalize(parse_program(NESTED))
    assert normalize(n) == n


def test_normalize_rejects_open_programs():
    with pytest.raises(NotClosed):
        normalize(Program((), parse_term("x")))


def test_normalize_orders_type1_first():
    prg = parse_program("box [y, X] in X @ y")
    assert normalize(prg).layers[0].names == ("X", "y")


def _agree(prg, n_oracles, n_words, max_len):
    norm = normalize(prg)
    # the word inputs keep their relative order, so run both with the same arguments
    orcs = [parse_oracle(s) for s in ("prepend:1", "reverse")]
    for os in itertools.product(orcs, repeat=n_oracles):
        for ws in itertools.product(list(words_upto(max_len)), repeat=n_words):
            assert run_program(prg, os, ws) == run_program(norm, os, ws)


def test_normalize_preserves_semantics():
    _agree(parse_program(DECLARE_FIRST), 1, 1, 3)
    _agree(parse_program(NESTED), 1, 1, 3)


def test_normalize_preserves_corpus_semantics():
    for name in ("ce.bff", "add.bff", "iter.bff"):
        prg = load(name)
        norm = normalize(prg)
        k, n = len(prg.oracle_inputs), len(prg.word_inputs)
        for spec in BUILTIN_ORACLES:
            o = [parse_oracle(spec)] * k
            for ws in itertools.product(list(words_upto(2)), repeat=n):
                assert run_program(prg, o, ws) == run_program(norm, o, ws)
