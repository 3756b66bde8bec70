"""Graphviz export of causal graphs."""

from __future__ import annotations

from pathlib import Path

from coopcheck.causal import CausalGraph


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: CausalGraph, name: str = "causal") -> str:
    """DOT text for ``g``.

    Undirected edges are emitted as ``dir=none`` arcs inside a digraph, since
    DOT does not allow ``--`` and ``->`` in the same graph. Agent VS nodes get
    a double border and goal variables a bold outline. Output depends only on
    the graph, so it is byte-stable.
    """
    lines = [f"digraph {_quote(name)} {{", "  node [shape=ellipse];"]
    for n in g.nodes:
        attrs = []
        if n in g.agent_vs:
            attrs.append("peripheries=2")
        if n in g.goal:
            attrs.append("style=bold")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_quote(n)}{suffix};")
    for a, b in g.directed:
        lines.append(f"  {_quote(a)} -> {_quote(b)};")
    for a, b in g.undirected:
        lines.append(f"  {_quote(a)} -> {_quote(b)} [dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(g: CausalGraph, path: str | Path | None = None, name: str = "causal") -> str:
    text = to_dot(g, name)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
