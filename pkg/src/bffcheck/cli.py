"""Command-line front end.

Exit codes: 0 accepted or success, 1 analysis rejection, 2 parse or
well-formedness failure, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from .dot import concat_to_dot, scg_to_dot
from .interp import DEFAULT_FUEL, EvalError, OracleSpecError, parse_oracle, run_program
from .parser import ParseFailure, parse_program, pretty, pretty_expr
from .report import VERDICTS, check_program, meets_bar
from .sct import flatten, flatten_program, guard_variables, loop_word, scg_of_assignment
from .syntax import Assign, While, check_well_formed, iter_stmts, normalize
from .words import DEFAULT_REGISTRY, ArityMismatch, UnknownOperator, load_registry

OK, REJECT, BAD_INPUT, RUNTIME = 0, 1, 2, 3


def _registry(args):
    if getattr(args, "ops", None):
        return load_registry(args.ops)
    return DEFAULT_REGISTRY


def _max_tier(args):
    if args.max_tier is not None:
        return args.max_tier
    env = os.environ.get("BFF_MAX_TIER")
    return int(env) if env else None


def _load(path: str, registry):
    """Parse and well-formedness check; returns (program, exit code or None)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, BAD_INPUT
    try:
        prg = parse_program(text)
    except ParseFailure as exc:
        for e in exc.errors:
            print(f"{path}:{e}", file=sys.stderr)
        return None, BAD_INPUT
    diags = check_well_formed(prg, registry)
    if diags:
        for d in diags:
            print(f"{path}:{d}", file=sys.stderr)
        return None, BAD_INPUT
    return prg, None


def cmd_check(args) -> int:
    registry = _registry(args)
    prg, code = _load(args.file, registry)
    if prg is None:
        return code
    report = check_program(prg, args.file, registry, _max_tier(args))
    if args.json:
        print(json.dumps(report.to_json(args.annotate), indent=2, ensure_ascii=False))
    else:
        print(report.to_text())
    return OK if meets_bar(report.verdict, args.require_rank0) else REJECT


def _word(lit: str) -> str:
    lit = lit.strip()
    if lit in ("~", '""', ""):
        return ""
    return lit.strip('"')


def cmd_run(args) -> int:
    registry = _registry(args)
    prg, code = _load(args.file, registry)
    if prg is None:
        return code
    try:
        words = [_word(a) for a in args.arg]
        bad = [w for w in words if any(c not in registry.alphabet for c in w)]
        if bad:
            raise OracleSpecError(f"not a word over {registry.alphabet!r}: {bad[0]!r}")
        oracles = [parse_oracle(o, registry.alphabet) for o in args.oracle]
        out = run_program(normalize(prg), oracles, words, args.fuel, registry)
    except OracleSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (EvalError, ArityMismatch, UnknownOperator) as exc:
        kind = getattr(exc, "kind", type(exc).__name__)
        print(f"runtime error: {kind}: {exc}", file=sys.stderr)
        return RUNTIME
    except RecursionError:
        print("runtime error: RecursionError: nesting too deep", file=sys.stderr)
        return RUNTIME
    print(out if out else "~")
    return OK


def cmd_flatten(args) -> int:
    prg, code = _load(args.file, _registry(args))
    if prg is None:
        return code
    sys.stdout.write(pretty(flatten_program(prg)))
    return OK


def cmd_graphs(args) -> int:
    registry = _registry(args)
    prg, code = _load(args.file, registry)
    if prg is None:
        return code
    out = Path(args.dot)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for proc in prg.procedures:
        flat = flatten(proc)
        if args.vars:
            V = frozenset(v.strip() for v in args.vars.split(",") if v.strip())
        else:
            V = guard_variables(proc) or frozenset(flat.variables)
        nodes = list(iter_stmts(flat.body))
        for n, asg in enumerate([s for s in nodes if isinstance(s, Assign)], 1):
            g = scg_of_assignment(asg, V, registry)
            path = out / f"{proc.name}_asg{n}.dot"
            path.write_text(scg_to_dot(g, f"{proc.name}_asg{n}", f"{asg.target} := {pretty_expr(asg.expr)}"))
            written.append(path)
        for n, loop in enumerate([s for s in nodes if isinstance(s, While)], 1):
            graphs = loop_word(loop.body, V, registry)
            path = out / f"{proc.name}_loop{n}.dot"
            path.write_text(concat_to_dot(graphs, V, f"{proc.name}_loop{n}", f"one pass of loop at {loop.span}"))
            written.append(path)
    for p in written:
        print(p)
    return OK


def _corpus_entry(d: Path, entry: dict, registry) -> list[str]:
    fails = []
    name = entry.get("file", "?")
    if entry.get("verdict") not in VERDICTS:
        return [f"{name}: bad expected verdict {entry.get('verdict')!r}"]
    try:
        prg = parse_program((d / name).read_text(encoding="utf-8"))
    except (OSError, ParseFailure) as exc:
        return [f"{name}: {exc}"]
    report = check_program(prg, name, registry)
    if report.verdict != entry["verdict"]:
        fails.append(f"{name}: verdict {report.verdict}, expected {entry['verdict']}")
    for run in entry.get("runs", []):
        try:
            oracles = [parse_oracle(o, registry.alphabet) for o in run.get("oracles", [])]
            words = [_word(a) for a in run.get("args", [])]
            out = run_program(normalize(prg), oracles, words, run.get("fuel", DEFAULT_FUEL), registry)
        except (EvalError, OracleSpecError, ArityMismatch) as exc:
            fails.append(f"{name}: run {run} failed: {exc}")
            continue
        if out != _word(run["expected"]):
            fails.append(f"{name}: run {run} gave {out or '~'}")
    return fails


def cmd_corpus(args) -> int:
    d = Path(args.dir)
    manifest = d / "manifest.json"
    registry = _registry(args)
    if not manifest.exists():
        if not any(d.glob("*.bff")):
            print(f"warning: {d} holds no corpus", file=sys.stderr)
            return OK
        print(f"error: {manifest} missing", file=sys.stderr)
        return REJECT
    try:
        entries = json.loads(manifest.read_text(encoding="utf-8")).get("entries", [])
    except (OSError, ValueError) as exc:
        print(f"error: {manifest}: {exc}", file=sys.stderr)
        return REJECT
    if not entries:
        print(f"warning: {manifest} lists no entries", file=sys.stderr)
    fails = []
    for entry in entries:
        problems = _corpus_entry(d, entry, registry)
        status = "FAIL" if problems else "ok"
        print(f"{status:4} {entry.get('file', '?')}")
        fails.extend(problems)
    for f in fails:
        print(f"  {f}", file=sys.stderr)
    return REJECT if fails else OK


def cmd_bench(args) -> int:
    from .plots import loglog_slope, save_scaling_plot
    from .synth import count_nodes, synthetic_program

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for size in args.sizes:
        prg = synthetic_program(size, seed=args.seed)
        n = count_nodes(prg)
        t0 = time.perf_counter()
        report = check_program(prg, f"synthetic-{size}")
        dt = time.perf_counter() - t0
        rows.append((size, n, dt, report.verdict))
        print(f"{n},{dt:.4f},{report.verdict}")
    with open(out / "bench.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["target", "nodes", "seconds", "verdict"])
        w.writerows(rows)
    sizes, times = [r[1] for r in rows], [r[2] for r in rows]
    if len(rows) >= 2:
        save_scaling_plot(out / "bench.png", sizes, times)
        print(f"slope {loglog_slope(sizes, times):.3f}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bffcheck", description="Check and run second-order programs.")
    ap.add_argument("--ops", help="JSON file with extra operators")
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="decide SAFE/SAFE0 and size-change acceptance")
    c.add_argument("file")
    c.add_argument("--max-tier", type=int, default=None)
    c.add_argument("--json", action="store_true")
    c.add_argument("--annotate", action="store_true", help="include loop tiers in JSON")
    c.add_argument("--require-rank0", action="store_true")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="evaluate a program on inputs")
    r.add_argument("file")
    r.add_argument("--arg", action="append", default=[])
    r.add_argument("--oracle", action="append", default=[])
    r.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("flatten", help="print the flattened program")
    f.add_argument("file")
    f.set_defaults(func=cmd_flatten)

    g = sub.add_parser("graphs", help="write size-change graphs as DOT")
    g.add_argument("file")
    g.add_argument("--dot", required=True, metavar="OUT_DIR")
    g.add_argument("--vars", help="comma-separated variable set (default: guard variables)")
    g.set_defaults(func=cmd_graphs)

    k = sub.add_parser("corpus", help="regression-check a corpus directory")
    k.add_argument("--dir", default="corpus")
    k.set_defaults(func=cmd_corpus)

    b = sub.add_parser("bench", help="time check on synthetic programs; writes CSV and PNG")
    b.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="bench-out")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    if hasattr(sys.stdout, "reconfigure"):
        sys.stdout.reconfigure(encoding="utf-8")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
