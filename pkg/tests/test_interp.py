import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from bffcheck.interp import (BUILTIN_ORACLES, FuelExhausted, GuardNotBoolean, InputArityMismatch,
                             OracleFn, OracleSpecError, Store, UnboundVariable, eval_expr, eval_stmt,
                             eval_term, parse_oracle, run_program)
from bffcheck.parser import parse_expr, parse_program, parse_stmt, parse_term
from bffcheck.sct import flatten_program
from bffcheck.words import restrict
from conftest import load
from oracles import REFERENCE_ORACLES, ce_reference, words_upto

f = OracleFn("f", lambda w: "1" + w[::-1])


def test_var_and_operators():
    mu = Store({"v": "101"})
    assert eval_expr({}, mu, {}, parse_expr("v")) == "101"
    assert eval_expr({}, mu, {}, parse_expr("pred(suc1(~))")) == ""


def test_oracle_call_goes_through_closure(ce):
    X1 = ce.main.closures[0]
    mu = Store({}, {"X": f})
    assert eval_expr({}, mu, {"X1": X1}, parse_expr("X1(~ |> ~)")) == f("1")


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        eval_expr({}, Store(), {}, parse_expr("x"))
    with pytest.raises(UnboundVariable):
        eval_expr({}, Store({"x": ""}), {}, parse_expr("Y(x |> x)"))


def test_loop_with_false_guard_leaves_store():
    mu = Store({"x": ""})
    out = eval_stmt({}, mu, {}, parse_stmt("while (x != ~) { x := pred(x) }"))
    assert out.words == {"x": ""}


def test_assignment_updates_one_variable():
    mu = Store({"x": "0", "y": "11"})
    out = eval_stmt({}, mu, {}, parse_stmt("x := suc1(x)"))
    assert out.words == {"x": "10", "y": "11"}
    assert mu.words["x"] == "0"


def test_one_pass_of_ce_loop(ce):
    phi = dict(zip(("X1", "X2"), ce.main.closures))
    loop_body = ce.procedures[0].body.second.second.body
    mu = Store({"v": "1", "z": "", "u": f("1")}, {"X": f})
    out = eval_stmt({}, mu, phi, loop_body)
    assert out.words["z"] == f(f(restrict("", f("1"))))
    assert out.words["v"] == ""


def test_guard_must_be_boolean():
    with pytest.raises(GuardNotBoolean):
        eval_stmt({}, Store({"x": "11"}), {}, parse_stmt("if (x) { skip }"))


def test_terms():
    assert eval_term({}, Store({"y": "11"}), parse_term("y")) == "11"
    assert eval_term({}, Store({"y": "0"}, {"X": f}), parse_term("X @ y")) == f("0")
    assert eval_term({}, Store({"y": "0"}, {"X": f}), parse_term("(\\a. X @ a) @ y")) == f("0")


def test_lambda_substitution_avoids_capture():
    t = parse_term("(\\a. (\\y. a) @ y) @ (X @ y)")
    assert eval_term({}, Store({"y": "0"}, {"X": f}), t) == f("0")


@pytest.mark.parametrize("name", ["prepend:1", "reverse", "id"])
def test_ce_matches_recursion(ce, name):
    o = parse_oracle(name)
    for w in words_upto(4):
        assert run_program(ce, [o], [w]) == ce_reference(REFERENCE_ORACLES[name], w)


def test_add(add):
    assert run_program(add, [], ["111", "11"]) == "11111"


def test_call_initialises_locals():
    prg = parse_program("declare P() { var u; skip; return u } in call P()")
    assert run_program(prg, [], []) == ""


def test_input_arity(add):
    with pytest.raises(InputArityMismatch) as exc:
        run_program(add, [], ["1"])
    assert exc.value.kind == "ArityMismatch"


def test_fuel_exhaustion_and_monotonicity(add):
    spin = parse_program("box [w] in declare P(x) { while (x != ~) { skip }; return x } in call P(w)")
    with pytest.raises(FuelExhausted):
        run_program(spin, [], ["1"], fuel=500)
    needed = next(n for n in range(1, 200) if _ok(add, n))
    for extra in (0, 1, 50, 10**6):
        assert run_program(add, [], ["11", "1"], fuel=needed + extra) == "111"


def _ok(prg, fuel):
    try:
        run_program(prg, [], ["11", "1"], fuel=fuel)
        return True
    except FuelExhausted:
        return False


def test_determinism_and_error_kinds(ce):
    runs = []
    for _ in range(2):
        try:
            runs.append(run_program(ce, [parse_oracle("dup")], ["1111"], fuel=40))
        except FuelExhausted as exc:
            runs.append(type(exc))
    assert runs[0] == runs[1]


def test_procedures_do_not_touch_the_caller():
    prg = parse_program("""box [w] in declare
      P(x) { x := suc1(x); return x }
    in call P(call P(w))""")
    mu = Store({"w": "0"})
    snapshot = mu.copy()
    assert eval_term({p.name: p for p in prg.procedures}, mu, prg.main) == "110"
    assert mu == snapshot


def test_rank0_mode_agrees():
    for name in ("ce.bff", "add.bff", "iter.bff", "tm_parity.bff"):
        prg = load(name)
        k, n = len(prg.oracle_inputs), len(prg.word_inputs)
        for spec in BUILTIN_ORACLES:
            os = [parse_oracle(spec)] * k
            for ws in itertools.product(list(words_upto(2)), repeat=n):
                assert run_program(prg, os, ws) == run_program(prg, os, ws, rank0=True)


def test_flatten_preserves_results():
    rng = random.Random(7)
    for name in ("ce.bff", "iter.bff", "tm_parity.bff"):
        prg = load(name)
        flat = flatten_program(prg)
        k, n = len(prg.oracle_inputs), len(prg.word_inputs)
        for _ in range(20):
            os = [parse_oracle(rng.choice(BUILTIN_ORACLES))] * k
            ws = [rng.choice(list(words_upto(4))) for _ in range(n)]
            assert run_program(prg, os, ws) == run_program(flat, os, ws)


@pytest.mark.parametrize("spec,arg,out", [
    ("id", "10", "10"),
    ("const:11", "0", "11"),
    ("prepend:0", "1", "01"),
    ("reverse", "100", "001"),
    ("dup", "10", "1010"),
    ("lenones", "000", "111"),
    ("compose(prepend:1,reverse)", "10", "101"),
])
def test_oracle_specs(spec, arg, out):
    assert parse_oracle(spec)(arg) == out


@pytest.mark.parametrize("spec", ["nope", "const:2", "compose(id)"])
def test_bad_oracle_specs(spec):
    with pytest.raises(OracleSpecError):
        parse_oracle(spec)


@settings(max_examples=50, deadline=None)
@given(st.text("01", max_size=5), st.text("01", max_size=5))
def test_add_lengths(x, y):
    prg = load("add.bff")
    out = run_program(prg, [], ["1" * len(x), "1" * len(y)])
    assert out == "1" * (len(x) + len(y))
