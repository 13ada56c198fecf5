"""Connections: portals from designated nodes onto a shortest path.

For a shortest path ``P = p_0 .. p_s`` of a piece and a set ``B`` of
designated nodes, :func:`path_connections` selects for every ``v`` in ``B``
a few pairs ``(i, dist(p_i, v))`` such that every ``p`` on ``P`` is reached
from ``v`` within a factor ``1 + eps`` through one of them.  Selection runs
in two sweeps along ``P`` (:func:`forward_phase`, :func:`backward_phase`).

Two engines evaluate the sweeps:

``"table"``
    Distances from every path node are tabulated with scipy and the
    sweep's labels are evaluated directly from their defining formula.
    Fast; the default.
``"stream"``
    The reference.  A shortest-path tree is re-rooted from ``p_i`` to
    ``p_{i+1}`` by replaying a :class:`ParentChangeStream`, and labels are
    maintained by subtree updates exactly as the sweep prescribes.  All
    arithmetic is exact (lengths are scaled to integers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heappop, heappush
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as cs_dijkstra

from pado.errors import InvalidParams, UnreachableNode
from pado.graph.embedding import EmbeddedPlanarGraph
from pado.graph.paths import dijkstra

INF = math.inf
ENGINES = ("table", "stream")
MODES = ("cut", "direct")


class Connection(NamedTuple):
    """Portal ``(p_{path_index}, v)`` with its stored distance."""

    path_index: int
    dist: float


class AttachmentInfo(NamedTuple):
    """Nearest path node ``i_of_v`` (smallest index on ties) and ``d_v``."""

    i_of_v: int
    d_v: float


@dataclass
class AuditLog:
    """Counters filled by the sweeps when auditing is on.

    ``phase_bound`` is the largest allowed number of connections per node
    per sweep; the ``*_violations`` counters must stay zero.
    """

    phase_bound: int = 0
    max_phase_count: int = 0
    bound_violations: int = 0
    potential_checks: int = 0
    potential_violations: int = 0
    mu_checks: int = 0
    mu_violations: int = 0

    def merge(self, other: "AuditLog") -> None:
        self.phase_bound = max(self.phase_bound, other.phase_bound)
        self.max_phase_count = max(self.max_phase_count, other.max_phase_count)
        for name in ("bound_violations", "potential_checks", "potential_violations", "mu_checks", "mu_violations"):
            setattr(self, name, getattr(self, name) + getattr(other, name))

    @property
    def ok(self) -> bool:
        return not (self.bound_violations or self.potential_violations or self.mu_violations)


def phase_bound(eps: float) -> int:
    """Connections allowed per node per sweep: the initial one, at most
    ``ceil(2 / eps)`` potential reductions, and one slack."""
    return 2 + math.ceil(2.0 / eps)


# ---------------------------------------------------------------------------
# cutting


@dataclass(frozen=True)
class CutPiece:
    """A piece cut open along a path.

    ``copies`` holds the node ids of each path copy in path order (one copy
    for a single-node path).  ``origin[v]`` is the piece node a cut-graph
    node stands for.
    """

    graph: EmbeddedPlanarGraph
    copies: tuple[tuple[int, ...], ...]
    origin: tuple[int, ...]


def path_edges(graph: EmbeddedPlanarGraph, nodes: Sequence[int]) -> list[int]:
    """Dart ``p_j -> p_{j+1}`` for each step of a node path: the shortest
    parallel edge, ties to the smaller edge id."""
    out = []
    for a, b in zip(nodes, nodes[1:]):
        best = None
        for v, w, d in graph.adj[a]:
            if v == b and (best is None or (w, d >> 1) < best[0]):
                best = ((w, d >> 1), d)
        if best is None:
            raise InvalidParams(f"path nodes {a} and {b} are not adjacent")
        out.append(best[1])
    return out


def cut_along_path(graph: EmbeddedPlanarGraph, nodes: Sequence[int]) -> CutPiece:
    """Duplicate every node and edge of the path ``nodes``.

    Copy A keeps the original ids; copy B uses fresh ids ``n + j`` for the
    nodes and ``m + j`` for the edges.  At an interior path node the darts
    strictly counterclockwise between the outgoing and the incoming path
    dart stay with copy A and the rest move to copy B; at the two ends
    every other dart stays with copy A.  A single-node path leaves the
    graph unchanged.
    """
    nodes = [int(v) for v in nodes]
    n, m = graph.n, graph.edge_count
    if len(nodes) <= 1:
        return CutPiece(graph, (tuple(nodes),), tuple(range(n)))
    s = len(nodes) - 1
    fwd = path_edges(graph, nodes)
    eu = list(graph.edge_u)
    ev = list(graph.edge_v)
    length = list(graph.length)
    syn = list(graph.synthetic)
    for j in range(s):
        e = fwd[j] >> 1
        eu.append(n + j)
        ev.append(n + j + 1)
        length.append(graph.length[e])
        syn.append(graph.synthetic[e])
    rotation = graph.rotation_lists() + [[] for _ in range(s + 1)]

    def move(d, target):
        e = d >> 1
        if d & 1:
            ev[e] = target
        else:
            eu[e] = target

    for j, p in enumerate(nodes):
        darts = graph.darts_around(p)
        out_d = fwd[j] if j < s else None
        in_d = fwd[j - 1] ^ 1 if j > 0 else None
        out_b = 2 * (m + j) if j < s else None
        in_b = 2 * (m + j - 1) + 1 if j > 0 else None
        if out_d is None or in_d is None:
            rotation[p] = darts
            rotation[n + j] = [out_b if out_d is not None else in_b]
            continue
        k = darts.index(out_d)
        darts = darts[k:] + darts[:k]
        q = darts.index(in_d)
        side_a = darts[: q + 1]
        side_b = darts[q + 1 :]
        for d in side_b:
            move(d, n + j)
        rotation[p] = side_a
        rotation[n + j] = [in_b] + side_b + [out_b]
    cut = EmbeddedPlanarGraph(n + s + 1, list(zip(eu, ev)), length, rotation=rotation, synthetic=syn)
    origin = tuple(range(n)) + tuple(nodes)
    return CutPiece(cut, (tuple(nodes), tuple(range(n, n + s + 1))), origin)


# ---------------------------------------------------------------------------
# attachment


def _attach(adj, path, lengths=None):
    """Multi-source Dijkstra keyed by ``(distance, path index)``.

    Equivalent to one search from ``p_0`` with the path's edges zeroed:
    every node is claimed by the nearest path node, smallest index on
    ties.  ``lengths`` overrides edge lengths (used for exact integers).
    """
    n = len(adj)
    dist = [INF] * n
    idx = [-1] * n
    done = [False] * n
    heap = []
    zero = 0 if lengths is not None else 0.0
    for i, p in enumerate(path):
        if idx[p] < 0:
            dist[p] = zero
            idx[p] = i
            heap.append((zero, i, p))
    heap.sort()
    while heap:
        du, iu, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w, d in adj[u]:
            if done[v]:
                continue
            nd = du + (w if lengths is None else lengths[d >> 1])
            if nd < dist[v] or (nd == dist[v] and iu < idx[v]):
                dist[v] = nd
                idx[v] = iu
                heappush(heap, (nd, iu, v))
    return idx, dist


def nearest_attachment(
    graph: EmbeddedPlanarGraph,
    path: Sequence[int],
    nodes: Iterable[int] | None = None,
    strict: bool = True,
) -> dict[int, AttachmentInfo]:
    """Nearest path node and its distance for each of ``nodes``.

    Parameters
    ----------
    graph : EmbeddedPlanarGraph
    path : sequence of int
        Path nodes ``p_0 .. p_s``.
    nodes : iterable of int, optional
        Nodes to report (default: all).
    strict : bool
        Raise on unreachable nodes instead of leaving them out.

    Raises
    ------
    UnreachableNode
        ``strict`` and some requested node has no path to ``P``.
    """
    if not path:
        raise InvalidParams("path must contain at least one node")
    idx, dist = _attach(graph.adj, list(path))
    wanted = range(graph.n) if nodes is None else nodes
    out = {}
    for v in wanted:
        if idx[v] < 0:
            if strict:
                raise UnreachableNode(f"node {v} cannot reach the path")
            continue
        out[v] = AttachmentInfo(idx[v], dist[v])
    return out


# ---------------------------------------------------------------------------
# parent-change stream (exact arithmetic)


class _Exact:
    """Edge lengths scaled to integers, plus a per-edge tie-break key.

    Float lengths are dyadic rationals, so one common power-of-two scale
    makes every length an integer and every path sum exact.  The
    tie-break keys are random positive integers (zero on the path's own
    edges); comparing ``(length, key sum)`` makes shortest paths unique and
    mutually consistent across roots.
    """

    def __init__(self, graph: EmbeddedPlanarGraph, path_darts: Sequence[int], seed: int = 0):
        den = 1
        for w in graph.length:
            den = max(den, w.as_integer_ratio()[1])
        self.scale = den
        self.ilen = [int(Fraction(w) * den) for w in graph.length]
        rng = np.random.default_rng(seed)
        key = rng.integers(1, 2**62, size=graph.edge_count).tolist()
        for d in path_darts:
            key[d >> 1] = 0
        self.key = key

    def to_float(self, x: int) -> float:
        return x / self.scale


def _exact_tree(graph, root, ex: _Exact):
    n = graph.n
    dist = [None] * n
    tie = [None] * n
    parent = [-1] * n
    done = [False] * n
    dist[root], tie[root] = 0, 0
    heap = [(0, 0, root)]
    ilen, key = ex.ilen, ex.key
    adj = graph.adj
    while heap:
        du, tu, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, _, d in adj[u]:
            if done[v]:
                continue
            e = d >> 1
            nd, nt = du + ilen[e], tu + key[e]
            if dist[v] is None or (nd, nt) < (dist[v], tie[v]):
                dist[v], tie[v] = nd, nt
                parent[v] = d
                heappush(heap, (nd, nt, v))
    return parent, dist


class StreamEdge(NamedTuple):
    """Inserted tree dart ``u -> v`` and the change of ``v``'s root
    distance (float and exact scaled integer)."""

    dart: int
    delta: float
    exact: int


@dataclass(frozen=True)
class ParentChangeStream:
    """Parent changes turning ``T'_i`` into ``T_i`` for ``i = 1 .. s``.

    ``initial_parent`` is ``T_0`` as parent darts (``-1`` at the root and
    unreachable nodes).  ``steps[i - 1]`` is ``sigma_i`` in application
    order.
    """

    path: tuple[int, ...]
    path_darts: tuple[int, ...]
    initial_parent: tuple[int, ...]
    steps: tuple[tuple[StreamEdge, ...], ...]
    scale: int = field(repr=False)
    ilen: tuple[int, ...] = field(repr=False)
    heads: tuple[int, ...] = field(repr=False)

    def reroot(self, parent: list[int], i: int) -> None:
        """Turn ``T_{i-1}`` (as ``parent``) into ``T'_i`` in place."""
        parent[self.path[i]] = -1
        parent[self.path[i - 1]] = self.path_darts[i - 1] ^ 1

    def replay(self):
        """Yield the parent array of ``T_0, T_1, .., T_s``."""
        parent = list(self.initial_parent)
        yield tuple(parent)
        for i, step in enumerate(self.steps, start=1):
            self.reroot(parent, i)
            for ch in step:
                parent[self.heads[ch.dart]] = ch.dart
            yield tuple(parent)

    @property
    def inserted(self) -> int:
        return sum(len(s) for s in self.steps)


def consistent_tree(graph: EmbeddedPlanarGraph, root: int, path: Sequence[int], seed: int = 0):
    """Shortest-path tree from ``root`` under the stream's tie-break.

    Returns ``(parent_dart, dist)`` with float distances (``inf`` for
    unreachable nodes).
    """
    ex = _Exact(graph, path_edges(graph, list(path)), seed)
    parent, dist = _exact_tree(graph, root, ex)
    return parent, [INF if x is None else ex.to_float(x) for x in dist]


def parent_change_stream(graph: EmbeddedPlanarGraph, path: Sequence[int], seed: int = 0) -> ParentChangeStream:
    """Build the parent-change stream along ``path`` by diffing
    consecutive shortest-path trees.

    ``sigma_i`` lists, in preorder of ``T_i``, every node whose parent in
    ``T_i`` differs from ``T'_i``; applying the changes in that order keeps
    the structure a tree after each change.
    """
    path = [int(v) for v in path]
    darts = path_edges(graph, path)
    ex = _Exact(graph, darts, seed)
    heads = tuple(graph.head(d) for d in range(2 * graph.edge_count))
    parent, dist = _exact_tree(graph, path[0], ex)
    initial = tuple(parent)
    steps = []
    cur = list(parent)
    for i in range(1, len(path)):
        cur[path[i]] = -1
        cur[path[i - 1]] = darts[i - 1] ^ 1
        new_parent, new_dist = _exact_tree(graph, path[i], ex)
        # preorder of T_i
        kids = [[] for _ in range(graph.n)]
        for v, d in enumerate(new_parent):
            if d >= 0:
                kids[graph.tail(d)].append(v)
        order = []
        stack = [path[i]]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(reversed(kids[u]))
        step = []
        for v in order:
            if new_parent[v] == cur[v]:
                continue
            before = _tree_dist(cur, v, ex.ilen, graph)
            cur[v] = new_parent[v]
            after = new_dist[v]
            step.append(StreamEdge(new_parent[v], ex.to_float(after - before), after - before))
        steps.append(tuple(step))
    stream = ParentChangeStream(
        path=tuple(path),
        path_darts=tuple(darts),
        initial_parent=initial,
        steps=tuple(steps),
        scale=ex.scale,
        ilen=tuple(ex.ilen),
        heads=heads,
    )
    return stream


def _tree_dist(parent, v, ilen, graph):
    total = 0
    d = parent[v]
    while d >= 0:
        total += ilen[d >> 1]
        d = parent[graph.tail(d)]
    return total


# ---------------------------------------------------------------------------
# sweeps


def graph_csr(graph: EmbeddedPlanarGraph) -> csr_matrix:
    """Symmetric CSR adjacency with parallel edges reduced to the shortest;
    zero lengths are kept as explicit entries."""
    n, m = graph.n, graph.edge_count
    if m == 0:
        return csr_matrix((n, n))
    u = np.asarray(graph.edge_u, dtype=np.int64)
    v = np.asarray(graph.edge_v, dtype=np.int64)
    w = np.asarray(graph.length, dtype=float)
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.concatenate([w, w])
    order = np.lexsort((data, cols, rows))
    rows, cols, data = rows[order], cols[order], data[order]
    keep = np.ones(len(rows), dtype=bool)
    keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    return csr_matrix((data[keep], (rows[keep], cols[keep])), shape=(n, n))


def distance_table(graph: EmbeddedPlanarGraph, path: Sequence[int], nodes: Sequence[int], csr=None) -> np.ndarray:
    """``D[i, k] = dist(p_i, nodes[k])``; searches start from whichever side
    is smaller."""
    csr = graph_csr(graph) if csr is None else csr
    path = np.asarray(path, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=np.int64)
    if len(nodes) == 0:
        return np.zeros((len(path), 0))
    if len(nodes) < len(path):
        return cs_dijkstra(csr, directed=True, indices=nodes)[:, path].T
    return cs_dijkstra(csr, directed=True, indices=path)[:, nodes]


def _sweep_table(D, prefix, iv, dv, eps, log):
    """Forward sweep on a distance table; yields ``(i, columns, dists)``."""
    s1, k = D.shape
    prefix = np.asarray(prefix, dtype=float)
    active = np.zeros(k, dtype=bool)
    last = np.zeros(k, dtype=np.int64)
    c_last = np.zeros(k)
    count = np.zeros(k, dtype=np.int64)
    reach = np.isfinite(dv)
    zero = dv == 0
    target = eps * dv
    out = []
    for i in range(s1):
        row = D[i]
        trig = (iv == i) & reach
        if active.any():
            # the label mu(v) = eps d_v - (dist(p_i, last) + c_last - D_i(v))
            excess = (prefix[i] - prefix[last]) + c_last - row
            trig |= active & (target - excess <= 0)
        cols = np.flatnonzero(trig)
        if not len(cols):
            continue
        if log is not None:
            again = cols[active[cols]]
            if len(again):
                drop = (prefix[i] - prefix[last[again]]) + c_last[again] - row[again]
                log.potential_checks += len(again)
                slack = 1e-9 * np.maximum(1.0, prefix[-1] + c_last[again])
                log.potential_violations += int(np.count_nonzero(drop < target[again] - slack))
        out.append((i, cols, row[cols].copy()))
        last[cols] = i
        c_last[cols] = row[cols]
        active[cols] = ~zero[cols]
        count[cols] += 1
    if log is not None:
        _log_counts(log, count, eps)
    return out


def _log_counts(log, counts, eps):
    bound = phase_bound(eps)
    log.phase_bound = max(log.phase_bound, bound)
    counts = np.asarray(counts)
    if counts.size:
        log.max_phase_count = max(log.max_phase_count, int(counts.max()))
        log.bound_violations += int(np.count_nonzero(counts > bound))


def _sweep_stream(graph, designated, stream, iv, d_int, eps, log):
    """Forward sweep along ``stream.path`` maintaining the labels by
    subtree updates.  Exact: labels are kept as scaled integers ``X`` with
    ``mu(v) = eps d_v - X(v) / scale``.

    Returns ``[(i, v, exact_dist), ...]``.
    """
    path = stream.path
    heads = stream.heads
    ilen = stream.ilen
    eps_q = Fraction(eps)
    prefix = [0]
    for d in stream.path_darts:
        prefix.append(prefix[-1] + ilen[d >> 1])
    parent = list(stream.initial_parent)
    kids = [set() for _ in range(graph.n)]
    for v, d in enumerate(parent):
        if d >= 0:
            kids[heads[d ^ 1]].add(v)

    def tree_dist(v):
        total = 0
        d = parent[v]
        while d >= 0:
            total += ilen[d >> 1]
            d = parent[heads[d ^ 1]]
        return total

    def subtree(v):
        stack = [v]
        while stack:
            x = stack.pop()
            yield x
            stack.extend(kids[x])

    def set_parent(v, d):
        old = parent[v]
        if old >= 0:
            kids[heads[old ^ 1]].discard(v)
        parent[v] = d
        if d >= 0:
            kids[heads[d ^ 1]].add(v)

    X: dict[int, int] = {}
    last: dict[int, int] = {}
    c_last: dict[int, int] = {}
    count = {v: 0 for v in designated}
    out = []
    for i in range(len(path)):
        if i > 0:
            p = path[i]
            w = ilen[stream.path_darts[i - 1] >> 1]
            shift = w + tree_dist(p)
            for x in subtree(p):
                if x in X:
                    X[x] += shift
            set_parent(p, -1)
            set_parent(path[i - 1], stream.path_darts[i - 1] ^ 1)
            for ch in stream.steps[i - 1]:
                v = heads[ch.dart]
                set_parent(v, ch.dart)
                for x in subtree(v):
                    if x in X:
                        X[x] -= ch.exact
        if log is not None:
            for v, xv in X.items():
                log.mu_checks += 1
                if xv != prefix[i] - prefix[last[v]] + c_last[v] - tree_dist(v):
                    log.mu_violations += 1
        for v in designated:
            if iv[v] == i:
                pass
            elif v not in X or X[v] < eps_q * d_int[v]:
                continue
            dt = tree_dist(v)
            if v in X and log is not None:
                log.potential_checks += 1
                drop = (prefix[i] - prefix[last[v]]) + c_last[v] - dt
                if drop < eps_q * d_int[v]:
                    log.potential_violations += 1
            out.append((i, v, dt))
            count[v] += 1
            last[v] = i
            c_last[v] = dt
            if d_int[v] > 0:
                X[v] = 0
    if log is not None:
        _log_counts(log, list(count.values()), eps)
    return out


def _check_eps(eps):
    if not (isinstance(eps, (int, float)) and math.isfinite(eps) and eps > 0):
        raise InvalidParams(f"epsilon must be a positive finite number, got {eps!r}")
    return float(eps)


def _prefix_of(graph, nodes, prefix):
    if prefix is not None:
        return [float(x) for x in prefix]
    out = [0.0]
    for d in path_edges(graph, nodes):
        out.append(out[-1] + graph.length[d >> 1])
    return out


def _run_phase(graph, designated, path, prefix, eps, backward, engine, attachments, log, table=None, stream=None):
    designated = sorted(set(int(v) for v in designated))
    path = [int(v) for v in path]
    s = len(path) - 1
    res: dict[int, list[Connection]] = {v: [] for v in designated}
    if not designated:
        return res
    if engine == "table":
        D = distance_table(graph, path, designated) if table is None else table
        if attachments is None:
            iv = np.argmin(D, axis=0)
            dv = D[iv, np.arange(len(designated))]
        else:
            iv = np.array([attachments[v].i_of_v if v in attachments else -1 for v in designated])
            dv = np.array([attachments[v].d_v if v in attachments else INF for v in designated])
        pre = np.asarray(prefix, dtype=float)
        if backward:
            D, pre, iv = D[::-1], pre[-1] - pre[::-1], s - iv
        for i, cols, dists in _sweep_table(D, pre, iv, dv, eps, log):
            j = s - i if backward else i
            for c, x in zip(cols.tolist(), dists.tolist()):
                res[designated[c]].append(Connection(j, x))
    elif engine == "stream":
        idx, d_int = _exact_attachment(graph, path, stream)
        order = path[::-1] if backward else path
        if stream is None or list(stream.path) != order:
            stream = parent_change_stream(graph, order)
        iv = {v: (s - idx[v] if backward else idx[v]) for v in designated if idx[v] >= 0}
        live = [v for v in designated if v in iv]
        for i, v, dt in _sweep_stream(graph, live, stream, iv, d_int, eps, log):
            res[v].append(Connection(s - i if backward else i, dt / stream.scale))
    else:
        raise InvalidParams(f"unknown engine {engine!r}; expected one of {ENGINES}")
    for v in res:
        res[v].sort()
    return res


def _exact_attachment(graph, path, stream=None):
    ex = _Exact(graph, path_edges(graph, path))
    return _attach(graph.adj, path, ex.ilen)


def forward_phase(
    graph: EmbeddedPlanarGraph,
    designated: Iterable[int],
    path: Sequence[int],
    eps: float,
    prefix: Sequence[float] | None = None,
    attachments: dict[int, AttachmentInfo] | None = None,
    stream: ParentChangeStream | None = None,
    engine: str = "table",
    audit: AuditLog | None = None,
) -> dict[int, list[Connection]]:
    """Connections at path indices ``>= i(v)`` for every designated node.

    Sweeps ``i = 0 .. s``.  A node gets a connection at its own ``i(v)``
    and afterwards whenever its label ``mu(v)`` has dropped to zero, which
    happens once the detour through its latest connection exceeds the
    tree distance from ``p_i`` by ``eps * d_v``.  Nodes at distance zero
    from the path get exactly one connection.

    Parameters
    ----------
    graph : EmbeddedPlanarGraph
    designated : iterable of int
    path : sequence of int
        A shortest path ``p_0 .. p_s`` of ``graph``.
    eps : float
    prefix : sequence of float, optional
        Cumulative path lengths; derived from ``graph`` when omitted.
    attachments : dict, optional
        Output of :func:`nearest_attachment` (table engine only).
    stream : ParentChangeStream, optional
        Precomputed stream along ``path`` (stream engine only).
    engine : {"table", "stream"}
    audit : AuditLog, optional
        Receives connection counts, potential-drop and label checks.
    """
    eps = _check_eps(eps)
    prefix = _prefix_of(graph, list(path), prefix)
    return _run_phase(graph, designated, path, prefix, eps, False, engine, attachments, audit, stream=stream)


def backward_phase(
    graph: EmbeddedPlanarGraph,
    designated: Iterable[int],
    path: Sequence[int],
    eps: float,
    prefix: Sequence[float] | None = None,
    attachments: dict[int, AttachmentInfo] | None = None,
    stream: ParentChangeStream | None = None,
    engine: str = "table",
    audit: AuditLog | None = None,
) -> dict[int, list[Connection]]:
    """Mirror of :func:`forward_phase` sweeping ``p_s .. p_0``; connections
    sit at indices ``<= i(v)``.  A given ``stream`` must run along the
    reversed path."""
    eps = _check_eps(eps)
    prefix = _prefix_of(graph, list(path), prefix)
    return _run_phase(graph, designated, path, prefix, eps, True, engine, attachments, audit, stream=stream)


def _union(into: dict[int, dict[int, float]], part: dict[int, list[Connection]]):
    for v, conns in part.items():
        slot = into.setdefault(v, {})
        for i, x in conns:
            if i not in slot or x < slot[i]:
                slot[i] = x


def path_connections(
    graph: EmbeddedPlanarGraph,
    designated: Iterable[int],
    path,
    eps: float,
    mode: str = "cut",
    engine: str = "table",
    audit: AuditLog | None = None,
) -> dict[int, tuple[Connection, ...]]:
    """Connections of every designated node with respect to ``path``.

    Parameters
    ----------
    graph : EmbeddedPlanarGraph
        The piece.
    designated : iterable of int
    path : SeparatorPath or sequence of int
        A shortest path of the piece (node ids local to ``graph``).
    eps : float
    mode : {"cut", "direct"}
        ``"cut"`` runs both sweeps once per path copy of the piece cut open
        along the path and merges the results; ``"direct"`` sweeps the
        uncut piece.
    engine : {"table", "stream"}
    audit : AuditLog, optional

    Returns
    -------
    dict
        Per designated node, connections sorted by path index; at equal
        index the smaller distance is kept.  Nodes that cannot reach the
        path get an empty tuple.  Path nodes get the single connection
        ``(own index, 0)``.
    """
    eps = _check_eps(eps)
    if mode not in MODES:
        raise InvalidParams(f"unknown mode {mode!r}; expected one of {MODES}")
    if engine not in ENGINES:
        raise InvalidParams(f"unknown engine {engine!r}; expected one of {ENGINES}")
    nodes = list(getattr(path, "nodes", path))
    prefix = _prefix_of(graph, nodes, getattr(path, "prefix_dist", None))
    designated = sorted(set(int(v) for v in designated))
    pos = {}
    for i, p in enumerate(nodes):
        pos.setdefault(p, i)
    merged: dict[int, dict[int, float]] = {}
    for v in designated:
        merged[v] = {pos[v]: 0.0} if v in pos else {}
    rest = [v for v in designated if v not in pos]
    if rest:
        if mode == "direct":
            runs = [(graph, nodes)]
        else:
            cut = cut_along_path(graph, nodes)
            runs = [(cut.graph, list(copy)) for copy in cut.copies]
        for g, copy in runs:
            table = distance_table(g, copy, rest) if engine == "table" else None
            for backward in (False, True):
                log = AuditLog() if audit is not None else None
                part = _run_phase(g, rest, copy, prefix, eps, backward, engine, None, log, table=table)
                if log is not None:
                    audit.merge(log)
                _union(merged, part)
    return {v: tuple(Connection(i, x) for i, x in sorted(merged[v].items())) for v in designated}


def verify_cover(
    graph: EmbeddedPlanarGraph,
    v: int,
    path,
    connections: Sequence[Connection],
    eps: float,
    rtol: float = 1e-9,
) -> bool:
    """True iff every path node ``p`` with finite ``dist(p, v)`` has a
    connection ``(p', c)`` with ``dist(p, p') + c <= (1 + eps) dist(p, v)``.

    Distances along the path come from its prefix lengths; ``dist(p, v)``
    is computed exactly by Dijkstra from ``v``.
    """
    nodes = list(getattr(path, "nodes", path))
    prefix = np.asarray(_prefix_of(graph, nodes, getattr(path, "prefix_dist", None)))
    dist, _ = dijkstra(graph.adj, [v])
    target = np.array([dist[p] for p in nodes])
    finite = np.isfinite(target)
    if not finite.any():
        return True
    if not len(connections):
        return False
    idx = np.array([c.path_index for c in connections])
    cd = np.array([c.dist for c in connections], dtype=float)
    via = np.abs(prefix[:, None] - prefix[idx][None, :]) + cd[None, :]
    best = via.min(axis=1)
    bound = (1.0 + eps) * target
    return bool(np.all(best[finite] <= bound[finite] * (1 + rtol) + rtol))
