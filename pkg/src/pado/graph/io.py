"""Text format for embedded graphs.

::

    pado-graph 1 <n> <m> <mode>        # mode is "rot" or "xy"
    <id> <x> <y>                       # xy: n node lines
    <id> <d0> <d1> ...                 # rot: outgoing darts, ccw
    <u> <v> <length>                   # m edge lines

Dart ``2*e`` leaves ``u`` of edge line ``e`` (0-based), dart ``2*e + 1``
leaves ``v``.  ``#`` starts a comment.
"""

from __future__ import annotations

import math
from pathlib import Path

from pado.errors import InvalidGraph, ParseError
from pado.graph.embedding import EmbeddedPlanarGraph

MAGIC = "pado-graph"
VERSION = 1


def _num(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def parse_graph(text: str) -> EmbeddedPlanarGraph:
    """Parse graph text; errors carry the 1-based line number."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            rows.append((lineno, body))
    if not rows:
        raise ParseError("empty graph file", 1)
    lineno, head = rows[0]
    if len(head) != 5 or head[0] != MAGIC:
        raise ParseError(f"expected '{MAGIC} {VERSION} <n> <m> <mode>'", lineno)
    if head[1] != str(VERSION):
        raise ParseError(f"unsupported format version {head[1]}", lineno)
    try:
        n, m = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError("node and edge counts must be integers", lineno) from None
    mode = head[4]
    if mode not in ("rot", "xy"):
        raise ParseError(f"mode must be 'rot' or 'xy', got {mode!r}", lineno)
    if n < 1 or m < 0:
        raise ParseError("need n >= 1 and m >= 0", lineno)
    body = rows[1:]
    if len(body) != n + m:
        last = body[-1][0] if body else lineno
        raise ParseError(f"expected {n} node and {m} edge lines, found {len(body)} data lines", last)
    per_node = [None] * n
    for lineno, tok in body[:n]:
        try:
            vid = int(tok[0])
        except ValueError:
            raise ParseError(f"bad node id {tok[0]!r}", lineno) from None
        if not 0 <= vid < n:
            raise ParseError(f"node id {vid} out of range", lineno)
        if per_node[vid] is not None:
            raise ParseError(f"node {vid} listed twice", lineno)
        try:
            if mode == "xy":
                if len(tok) != 3:
                    raise ParseError("xy node lines are '<id> <x> <y>'", lineno)
                per_node[vid] = (float(tok[1]), float(tok[2]))
            else:
                per_node[vid] = [int(t) for t in tok[1:]]
        except ValueError:
            raise ParseError(f"bad number on node line: {' '.join(tok)}", lineno) from None
    edges, lengths = [], []
    for lineno, tok in body[n:]:
        if len(tok) != 3:
            raise ParseError("edge lines are '<u> <v> <length>'", lineno)
        try:
            u, v, w = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            raise ParseError(f"bad number on edge line: {' '.join(tok)}", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge endpoint out of range: {u} {v}", lineno)
        if not math.isfinite(w) or w < 0:
            raise ParseError(f"edge length must be finite and nonnegative, got {tok[2]}", lineno)
        edges.append((u, v))
        lengths.append(w)
    try:
        if mode == "xy":
            return EmbeddedPlanarGraph(n, edges, lengths, coords=per_node)
        return EmbeddedPlanarGraph(n, edges, lengths, rotation=per_node)
    except InvalidGraph as exc:
        raise ParseError(str(exc), 0) from exc


def serialize_graph(graph: EmbeddedPlanarGraph) -> str:
    """Render ``graph`` in the text format; xy mode when coordinates exist.

    Synthetic edges are written like any other edge.
    """
    mode = "xy" if graph.coords is not None else "rot"
    out = [f"{MAGIC} {VERSION} {graph.n} {graph.edge_count} {mode}"]
    if mode == "xy":
        out.extend(f"{v} {_num(x)} {_num(y)}" for v, (x, y) in enumerate(graph.coords))
    else:
        for v in range(graph.n):
            out.append(" ".join([str(v)] + [str(d) for d in graph.darts_around(v)]))
    out.extend(
        f"{u} {v} {_num(w)}" for u, v, w in zip(graph.edge_u, graph.edge_v, graph.length)
    )
    return "\n".join(out) + "\n"


def read_graph(path) -> EmbeddedPlanarGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def write_graph(graph: EmbeddedPlanarGraph, path) -> None:
    Path(path).write_text(serialize_graph(graph), encoding="utf-8")
