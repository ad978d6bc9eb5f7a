import json
import random

import pytest
from hypothesis import given, strategies as st

from bffcheck.words import (DEFAULT_REGISTRY, ArityMismatch, Decrease, OperatorInfo, UnknownOperator,
                            admissible_signature, apply_operator, load_registry, restrict,
                            validate_category)
from oracles import restrict_ref

words = st.text(alphabet="01", max_size=12)


@pytest.mark.parametrize("v,u,out", [
    ("1001", "", "1"),
    ("1001", "10", "101"),
    ("1001", "100100", "1001100"),
    ("", "", "1"),
])
def test_restrict_known_values(v, u, out):
    assert restrict(v, u) == out


@given(words, words)
def test_restrict_matches_reference(v, u):
    assert restrict(v, u) == restrict_ref(v, u)
    assert len(restrict(v, u)) == len(u) + 1


@pytest.mark.parametrize("op,args,out", [
    ("pred", ["101"], "01"),
    ("pred", [""], ""),
    ("neq", ["1", "1"], "0"),
    ("neq", ["1", "0"], "1"),
    ("eqw", ["10", "10"], "1"),
    ("lmin", ["1", "00"], "1"),
    ("lmin", ["11", "00"], "00"),
    ("suc1", ["01"], "101"),
    ("suc0", [""], "0"),
    ("head", ["01"], "0"),
    ("eps", [], ""),
    ('"110"', [], "110"),
])
def test_builtin_semantics(op, args, out):
    assert apply_operator(DEFAULT_REGISTRY, op, args) == out


def test_arity_and_unknown():
    with pytest.raises(ArityMismatch):
        apply_operator(DEFAULT_REGISTRY, "pred", ["1", "0"])
    with pytest.raises(UnknownOperator):
        DEFAULT_REGISTRY.get("frobnicate")
    with pytest.raises(UnknownOperator):
        DEFAULT_REGISTRY.get('"012"')


def test_builtins_satisfy_their_categories():
    for op in DEFAULT_REGISTRY:
        assert validate_category(op, 300, seed=3) == [], op.name


def test_positive_operator_mislabelled_neutral_is_caught():
    bad = OperatorInfo("suc1", 1, lambda v: "1" + v)
    assert validate_category(bad, 50)


def test_wrong_decrease_claim_is_caught():
    bad = OperatorInfo("dup", 1, lambda v: v + v, decrease=Decrease(1, False))
    assert validate_category(bad, 50)


def test_validate_rejects_nonpositive_samples():
    with pytest.raises(ValueError):
        validate_category(DEFAULT_REGISTRY.get("pred"), 0)


@pytest.mark.parametrize("op,args,out,k,ok", [
    ("neq", (1, 1), 1, 1, True),
    ("neq", (1, 0), 1, 1, False),
    ("suc1", (1,), 1, 1, False),
    ("suc1", (0,), 0, 1, True),
    ("pred", (2,), 1, 2, True),
    ("pred", (2,), 1, 1, False),
])
def test_admissible_signature(op, args, out, k, ok):
    assert admissible_signature(DEFAULT_REGISTRY.get(op), args, out, k) is ok


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4))
def test_maximal_env_monotone_in_innermost_tier(a, o, k):
    info = DEFAULT_REGISTRY.get("lmin")
    if admissible_signature(info, (a, a), o, k):
        assert admissible_signature(info, (a, a), o, k + 1)


def test_load_registry_from_json(tmp_path):
    cfg = {"operators": [
        {"name": "drop2", "template": "drop-prefix", "count": 2, "decrease": {"index": 1, "strict": False}},
        {"name": "k101", "template": "constant", "word": "101"},
    ]}
    path = tmp_path / "ops.json"
    path.write_text(json.dumps(cfg))
    reg = load_registry(path)
    assert apply_operator(reg, "drop2", ["1101"]) == "01"
    assert apply_operator(reg, "k101", []) == "101"
    assert apply_operator(reg, "pred", ["10"]) == "0"
    assert validate_category(reg.get("drop2"), 100) == []


def test_random_words_stay_in_alphabet():
    from bffcheck.words import random_word
    rng = random.Random(0)
    assert all(set(random_word(rng)) <= {"0", "1"} for _ in range(100))
