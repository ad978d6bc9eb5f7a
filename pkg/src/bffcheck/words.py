"""Words, the truncate-and-pad restriction, and the operator registry.

Words are plain ``str`` values over an alphabet that always contains
``0`` and ``1``.  Operators carry their semantics together with the
classification used by the tier checker (neutral / positive) and by the
size-change analysis (decreasing argument index).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

DEFAULT_ALPHABET = "01"
EPSILON = ""

WordFn = Callable[..., str]


class UnknownOperator(KeyError):
    pass


class ArityMismatch(ValueError):
    pass


def restrict(v: str, u: str) -> str:
    """Truncate ``v`` to ``|u|`` symbols, then pad with ``10^k`` up to ``|u| + 1``."""
    n = len(u)
    prefix = v[:n]
    return prefix + "1" + "0" * (n - len(prefix))


def is_subword(v: str, w: str) -> bool:
    return v in w


@dataclass(frozen=True)
class Decrease:
    index: int  # 1-based argument position
    strict: bool


@dataclass(frozen=True)
class OperatorInfo:
    name: str
    arity: int
    semantics: WordFn = field(compare=False, repr=False)
    positive: bool = False
    bound: int = 0  # c_op for positive operators
    decrease: Decrease | None = None
    # Optional restriction of the operator typing environment:
    # kin -> set of (arg tiers..., out tier).  None means the maximal safe one.
    signatures: Mapping[int, frozenset] | None = field(default=None, compare=False, repr=False)

    @property
    def neutral(self) -> bool:
        return not self.positive

    def __call__(self, *args: str) -> str:
        return self.semantics(*args)


def _pred(v: str) -> str:
    return v[1:]


def _head(v: str) -> str:
    return v[:1]


def _neq(v: str, w: str) -> str:
    return "1" if v != w else "0"


def _eqw(v: str, w: str) -> str:
    return "1" if v == w else "0"


def _lmin(a: str, b: str) -> str:
    return a if len(a) < len(b) else b


def _const(word: str) -> WordFn:
    return lambda: word


def _prepend(prefix: str) -> WordFn:
    return lambda v: prefix + v


BUILTINS = (
    OperatorInfo("eps", 0, _const(EPSILON)),
    OperatorInfo("pred", 1, _pred, decrease=Decrease(1, True)),
    OperatorInfo("suc0", 1, _prepend("0"), positive=True, bound=1),
    OperatorInfo("suc1", 1, _prepend("1"), positive=True, bound=1),
    OperatorInfo("head", 1, _head, decrease=Decrease(1, False)),
    OperatorInfo("neq", 2, _neq),
    OperatorInfo("eqw", 2, _eqw),
    OperatorInfo("lmin", 2, _lmin, decrease=Decrease(2, False)),
)

# infix spellings accepted by the parser
INFIX = {"!=": "neq", "==": "eqw"}
INFIX_OF = {v: k for k, v in INFIX.items()}


def literal_name(word: str) -> str:
    return '"' + word + '"'


def is_literal_name(name: str) -> bool:
    return len(name) >= 2 and name[0] == '"' and name[-1] == '"'


class OperatorRegistry:
    """Name -> OperatorInfo.  Quoted literal names resolve to constants."""

    def __init__(self, ops: Iterable[OperatorInfo] = BUILTINS, alphabet: str = DEFAULT_ALPHABET):
        if not {"0", "1"} <= set(alphabet):
            raise ValueError("alphabet must contain 0 and 1")
        self.alphabet = alphabet
        self._ops: dict[str, OperatorInfo] = {}
        for op in ops:
            self.add(op)

    def add(self, op: OperatorInfo) -> None:
        if op.name in self._ops:
            raise ValueError(f"duplicate operator {op.name!r}")
        self._ops[op.name] = op

    def __contains__(self, name: str) -> bool:
        return name in self._ops or (is_literal_name(name) and self._valid_word(name[1:-1]))

    def __iter__(self):
        return iter(self._ops.values())

    def _valid_word(self, w: str) -> bool:
        return all(c in self.alphabet for c in w)

    def get(self, name: str) -> OperatorInfo:
        op = self._ops.get(name)
        if op is not None:
            return op
        if is_literal_name(name) and self._valid_word(name[1:-1]):
            return OperatorInfo(name, 0, _const(name[1:-1]))
        raise UnknownOperator(name)

    def restricted(self) -> bool:
        return any(op.signatures is not None for op in self._ops.values())


DEFAULT_REGISTRY = OperatorRegistry()


def apply_operator(registry: OperatorRegistry, name: str, args: Sequence[str]) -> str:
    op = registry.get(name)
    if len(args) != op.arity:
        raise ArityMismatch(f"{name} expects {op.arity} arguments, got {len(args)}")
    return op.semantics(*args)


def random_word(rng: random.Random, alphabet: str = DEFAULT_ALPHABET, max_len: int = 16) -> str:
    n = rng.randint(0, max_len)
    return "".join(rng.choice(alphabet) for _ in range(n))


def validate_category(info: OperatorInfo, samples: int, *, alphabet: str = DEFAULT_ALPHABET,
                      seed: int = 0, max_len: int = 16) -> list[str]:
    """Sample argument tuples and report violations of the declared metadata.

    An empty list means no counterexample was found; this is not a proof.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = random.Random(seed)
    n = info.arity
    tuples = [tuple(EPSILON for _ in range(n))]
    tuples += [tuple(random_word(rng, alphabet, max_len) for _ in range(n)) for _ in range(samples - 1)]
    outs = [(ws, info.semantics(*ws)) for ws in tuples]

    problems: list[str] = []
    for ws, out in outs:
        if any(c not in alphabet for c in out):
            problems.append(f"{info.name}{ws} = {out!r} leaves the alphabet")

    if n > 0 and info.neutral:
        predicate = all(out in ("0", "1") for _, out in outs)
        if not predicate:
            for ws, out in outs:
                if not any(is_subword(out, w) for w in ws):
                    problems.append(f"{info.name}{ws} = {out!r}: not a subword of any argument")
    if info.positive:
        for ws, out in outs:
            if len(out) > max(map(len, ws), default=0) + info.bound:
                problems.append(f"{info.name}{ws} = {out!r}: exceeds max length + {info.bound}")
    if info.decrease is not None:
        i = info.decrease.index - 1
        for ws, out in outs:
            if all(w == EPSILON for w in ws):
                if out != EPSILON:
                    problems.append(f"{info.name}{ws} = {out!r}: must map empty words to the empty word")
            elif info.decrease.strict and not len(out) < len(ws[i]):
                problems.append(f"{info.name}{ws} = {out!r}: not strictly decreasing in {i + 1}")
            elif not len(out) <= len(ws[i]):
                problems.append(f"{info.name}{ws} = {out!r}: not decreasing in {i + 1}")
    return problems


def admissible_signature(info: OperatorInfo, arg_tiers: Sequence[int], out_tier: int, k: int) -> bool:
    """Membership of ``arg_tiers -> out_tier`` in the safe environment at innermost tier ``k``.

    Without explicit ``signatures`` this is the maximal safe environment.
    Constants are unconstrained.
    """
    if len(arg_tiers) != info.arity:
        raise ArityMismatch(f"{info.name} expects {info.arity} tiers")
    if info.signatures is not None:
        return (*arg_tiers, out_tier) in info.signatures.get(k, frozenset())
    if info.arity == 0:
        return True
    if not (out_tier <= min(arg_tiers) and max(arg_tiers) <= k):
        return False
    return not info.positive or out_tier < k


# --- registry extension config -------------------------------------------------

def _template(spec: Mapping) -> tuple[WordFn, int]:
    kind = spec["template"]
    if kind == "constant":
        return _const(spec["word"]), 0
    if kind == "prepend-symbol":
        return _prepend(spec["word"]), 1
    if kind == "drop-prefix":
        n = int(spec.get("count", 1))
        return (lambda v: v[n:]), 1
    if kind == "length-min":
        return _lmin, 2
    if kind == "predicate-equal":
        return (_neq if spec.get("negate") else _eqw), 2
    raise ValueError(f"unknown semantics template {kind!r}")


def operator_from_config(spec: Mapping) -> OperatorInfo:
    fn, arity = _template(spec)
    if "arity" in spec and int(spec["arity"]) != arity:
        raise ValueError(f"{spec['name']}: template {spec['template']} has arity {arity}")
    category = spec.get("category", "neutral")
    if category not in ("neutral", "positive"):
        raise ValueError(f"{spec['name']}: bad category {category!r}")
    dec = spec.get("decrease")
    signatures = None
    if "signatures" in spec:
        signatures = {int(k): frozenset(tuple(s) for s in sigs) for k, sigs in spec["signatures"].items()}
    return OperatorInfo(
        spec["name"], arity, fn,
        positive=category == "positive",
        bound=int(spec.get("bound", 1 if category == "positive" else 0)),
        decrease=Decrease(int(dec["index"]), bool(dec["strict"])) if dec else None,
        signatures=signatures,
    )


def load_registry(path, alphabet: str = DEFAULT_ALPHABET) -> OperatorRegistry:
    """Built-ins plus the operators listed in a JSON config file."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    alphabet = data.get("alphabet", alphabet)
    extra = [operator_from_config(s) for s in data.get("operators", [])]
    return OperatorRegistry([*BUILTINS, *extra], alphabet=alphabet)
