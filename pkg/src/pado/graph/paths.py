"""Single-source shortest paths (binary-heap Dijkstra)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Collection, Iterable

from pado.errors import UnreachableNode
from pado.graph.embedding import EmbeddedPlanarGraph

INF = math.inf


@dataclass(frozen=True)
class ShortestPathTree:
    """Shortest-path tree: ``parent_dart[v]`` enters ``v`` (``-1`` at the
    root and at nodes outside the searched subgraph)."""

    root: int
    parent_dart: tuple[int, ...]
    dist: tuple[float, ...]

    def parent(self, graph: EmbeddedPlanarGraph, v: int) -> int:
        d = self.parent_dart[v]
        return -1 if d < 0 else graph.tail(d)

    def path_to(self, graph: EmbeddedPlanarGraph, v: int) -> list[int]:
        """Nodes from the root down to ``v``."""
        out = [v]
        d = self.parent_dart[v]
        while d >= 0:
            v = graph.tail(d)
            out.append(v)
            d = self.parent_dart[v]
        out.reverse()
        return out

    def hop_depth(self, graph: EmbeddedPlanarGraph) -> list[int]:
        depth = [-1] * len(self.dist)
        depth[self.root] = 0
        for v in sorted(range(len(self.dist)), key=lambda x: (self.dist[x], x)):
            if depth[v] >= 0 or self.parent_dart[v] < 0:
                continue
            chain = []
            while depth[v] < 0:
                chain.append(v)
                v = graph.tail(self.parent_dart[v])
            base = depth[v]
            for w in reversed(chain):
                base += 1
                depth[w] = base
        return depth


def dijkstra(
    adj: list[list[tuple[int, float, int]]],
    sources: Iterable[int],
    allowed: Collection[int] | None = None,
):
    """Multi-source Dijkstra over ``(neighbor, length, dart)`` adjacency.

    Pops are ordered by ``(distance, node id)`` and a parent is replaced only
    on strict improvement, so among equal-length alternatives the parent
    that was settled first (smaller distance, then smaller id) wins.

    Returns ``(dist, parent_dart)`` lists; unreachable nodes keep ``inf``
    and ``-1``.  ``allowed`` restricts the edge ids that may be used.
    """
    n = len(adj)
    dist = [INF] * n
    parent = [-1] * n
    done = [False] * n
    heap = []
    for s in sources:
        dist[s] = 0.0
        heap.append((0.0, s))
    heap.sort()
    while heap:
        du, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w, d in adj[u]:
            if done[v] or (allowed is not None and (d >> 1) not in allowed):
                continue
            nd = du + w
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = d
                heappush(heap, (nd, v))
    return dist, parent


def sssp(
    graph: EmbeddedPlanarGraph,
    root: int,
    allowed_edges: Collection[int] | None = None,
) -> ShortestPathTree:
    """Shortest-path tree from ``root`` over ``allowed_edges`` (all if None).

    Raises
    ------
    UnreachableNode
        A node of the allowed subgraph is not reachable from ``root``.
    """
    if not 0 <= root < graph.n:
        raise UnreachableNode(f"root {root} is not a node")
    if allowed_edges is not None and not isinstance(allowed_edges, (set, frozenset)):
        allowed_edges = frozenset(allowed_edges)
    dist, parent = dijkstra(graph.adj, [root], allowed_edges)
    if allowed_edges is None:
        members = range(graph.n)
    else:
        members = {root}
        for e in allowed_edges:
            members.add(graph.edge_u[e])
            members.add(graph.edge_v[e])
    for v in members:
        if dist[v] == INF:
            raise UnreachableNode(f"node {v} unreachable from {root}")
    return ShortestPathTree(root, tuple(parent), tuple(dist))


def distances_from(graph: EmbeddedPlanarGraph, source: int, allowed_edges=None) -> list[float]:
    """Plain distance list from ``source``; unreachable nodes are ``inf``."""
    if allowed_edges is not None and not isinstance(allowed_edges, (set, frozenset)):
        allowed_edges = frozenset(allowed_edges)
    return dijkstra(graph.adj, [source], allowed_edges)[0]
