"""Graphviz text for size-change graphs and their concatenations."""
from __future__ import annotations


def _q(s: str) -> str:
    return '"' + str(s).replace('"', '\\"') + '"'


def scg_to_dot(g, name: str = "scg", label: str = "") -> str:
    """One graph: left column is before the assignment, right column after."""
    vs = sorted(g.vars)
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", "  node [shape=plaintext];"]
    if label:
        lines.append(f"  label={_q(label)};")
    for side in ("L", "R"):
        lines.append(f"  subgraph cluster_{side} {{ style=invis;")
        for v in vs:
            lines.append(f"    {_q(side + ':' + v)} [label={_q(v)}];")
        lines.append("  }")
    for s, t, down in sorted(g.edges):
        attrs = ' [label="↓", color=red, penwidth=2]' if down else ""
        lines.append(f"  {_q('L:' + s)} -> {_q('R:' + t)}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def concat_to_dot(graphs: list, V, name: str = "loop", label: str = "") -> str:
    """Columns 0..n of the variables with each graph's edges between neighbours."""
    vs = sorted(V)
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", "  node [shape=plaintext];"]
    if label:
        lines.append(f"  label={_q(label)};")
    for i in range(len(graphs) + 1):
        lines.append(f"  subgraph cluster_{i} {{ style=invis;")
        for v in vs:
            lines.append(f"    {_q(f'{i}:{v}')} [label={_q(v)}];")
        lines.append("  }")
    for i, g in enumerate(graphs):
        for s, t, down in sorted(g.edges):
            attrs = ' [label="↓", color=red, penwidth=2]' if down else ""
            lines.append(f"  {_q(f'{i}:{s}')} -> {_q(f'{i + 1}:{t}')}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"
