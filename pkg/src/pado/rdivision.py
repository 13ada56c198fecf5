"""r-divisions: partitions of the edge set into regions with few boundary
nodes.

Regions are cut out by the same fundamental-cycle separators the
decomposition uses.  A first phase splits until every region has at most
``r`` edges; a second phase re-splits regions that ended up with too many
boundary nodes, balancing on boundary nodes rather than edges.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from pado.decomposition import separate
from pado.errors import InvalidParams, NoSeparator, UnknownRegion
from pado.graph.embedding import EmbeddedPlanarGraph

# phase two re-splits regions with more than this many times sqrt(r)
# boundary nodes
BOUNDARY_FACTOR = 4.0
MAX_BOUNDARY_ROUNDS = 4


@dataclass(frozen=True)
class RDivision:
    """Edge partition into regions.

    Attributes
    ----------
    r : int
        Target region size in edges.
    regions : tuple of tuple of int
        Edge ids of each region, ascending; regions are ordered by their
        smallest edge id.
    boundary : frozenset of int
        Nodes that occur in more than one region.
    home_region : tuple of int
        For each node the lowest region id containing it.
    """

    r: int
    regions: tuple[tuple[int, ...], ...]
    boundary: frozenset[int]
    home_region: tuple[int, ...]
    region_nodes: tuple[tuple[int, ...], ...] = field(repr=False)
    region_boundary: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def region_count(self) -> int:
        return len(self.regions)

    def constants(self, n: int) -> dict[str, float]:
        """Measured ``c_r``, ``c_b`` and ``c_B`` for this division."""
        sr = math.sqrt(self.r)
        return {
            "c_r": max((len(x) for x in self.regions), default=0) / self.r,
            "c_b": max((len(b) for b in self.region_boundary), default=0) / sr,
            "c_B": len(self.boundary) * sr / max(n, 1),
        }


def boundary_of_region(div: RDivision, region: int) -> frozenset[int]:
    """Nodes of ``region`` that also lie in another region.

    Raises
    ------
    UnknownRegion
        ``region`` is not a valid region id.
    """
    if not isinstance(region, int) or not 0 <= region < len(div.regions):
        raise UnknownRegion(f"no region {region!r}")
    return frozenset(div.region_boundary[region])


def _endpoints(graph, edges):
    eu, ev = graph.edge_u, graph.edge_v
    return sorted({eu[e] for e in edges} | {ev[e] for e in edges})


def _halve(graph: EmbeddedPlanarGraph, edges: Sequence[int]) -> list[list[int]]:
    """Fallback split: edges in BFS discovery order, cut in the middle."""
    eset = set(edges)
    adj = graph.adj
    order, seen_e = [], set()
    seen_v = set()
    for s in _endpoints(graph, edges):
        if s in seen_v:
            continue
        seen_v.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, _, d in adj[u]:
                e = d >> 1
                if e in eset and e not in seen_e:
                    seen_e.add(e)
                    order.append(e)
                    if v not in seen_v:
                        seen_v.add(v)
                        queue.append(v)
    half = len(order) // 2
    return [sorted(order[:half]), sorted(order[half:])]


def _split(graph: EmbeddedPlanarGraph, edges: Sequence[int], node_weight=None) -> list[list[int]]:
    """Split an edge set in two with a short balanced fundamental-cycle
    separator.

    Edges touching a side go to that side; edges with both ends on the
    separator go to the lighter part.  Sides and extra components are
    packed into two parts by weight (edge count, or summed ``node_weight``
    when given).
    """
    nodes = _endpoints(graph, edges)
    sub, node_map, edge_map = graph.subgraph(nodes, edges)
    if node_weight is None:
        # degree weights balance the edge counts of the two sides
        local_w = [float(len(row)) for row in sub.adj]
    else:
        local_w = [float(node_weight(v)) for v in node_map]
    try:
        sep = separate(sub, local_w, hop_tree=True, objective="short")
    except NoSeparator:
        return _halve(graph, edges)
    groups = [g for g in [sep.inside, sep.outside] + sep.others if g]
    group_of = {}
    for i, g in enumerate(groups):
        for v in g:
            group_of[v] = i
    group_edges = [[] for _ in groups]
    on_sep = []
    for j in range(sub.edge_count):
        a, b = sub.edge_u[j], sub.edge_v[j]
        k = group_of.get(a, group_of.get(b))
        if k is None:
            on_sep.append(edge_map[j])
        else:
            group_edges[k].append(edge_map[j])

    if node_weight is None:
        weight = [len(x) for x in group_edges]
    else:
        weight = [sum(local_w[v] for v in g) for g in groups]
    parts = ([], [])
    load = [0.0, 0.0]
    for i in sorted(range(len(groups)), key=lambda i: (-weight[i], i)):
        k = 0 if load[0] <= load[1] else 1
        parts[k].extend(group_edges[i])
        load[k] += weight[i]
    lighter = 0 if len(parts[0]) <= len(parts[1]) else 1
    parts[lighter].extend(on_sep)
    if not parts[0] or not parts[1]:
        return _halve(graph, edges)
    return [sorted(parts[0]), sorted(parts[1])]


def _finish(graph, r, regions) -> RDivision:
    regions = sorted((tuple(sorted(x)) for x in regions if x), key=lambda x: x[0])
    count = [0] * graph.n
    home = [-1] * graph.n
    region_nodes = []
    for i, reg in enumerate(regions):
        ns = _endpoints(graph, reg)
        region_nodes.append(tuple(ns))
        for v in ns:
            count[v] += 1
            if home[v] < 0:
                home[v] = i
    if not regions:
        # edgeless graph: one empty region holding every node
        regions = [()]
        region_nodes = [tuple(range(graph.n))]
        home = [0] * graph.n
    boundary = frozenset(v for v in range(graph.n) if count[v] > 1)
    region_boundary = tuple(tuple(v for v in ns if v in boundary) for ns in region_nodes)
    return RDivision(
        r=r,
        regions=tuple(regions),
        boundary=boundary,
        home_region=tuple(home),
        region_nodes=tuple(region_nodes),
        region_boundary=region_boundary,
    )


def compute_rdivision(graph: EmbeddedPlanarGraph, r: int) -> RDivision:
    """Partition the edges of a connected embedded graph into regions.

    Parameters
    ----------
    graph : EmbeddedPlanarGraph
        Connected embedded graph.  It need not be triangulated; separators
        are found on per-region triangulations.
    r : int
        Target region size in edges.  ``r >= m`` gives a single region.

    Returns
    -------
    RDivision
        Deterministic for a given input.
    """
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise InvalidParams(f"r must be a positive integer, got {r!r}")
    m = graph.edge_count
    done = []
    stack = [list(range(m))] if m else []
    while stack:
        edges = stack.pop()
        if len(edges) <= r:
            done.append(edges)
            continue
        stack.extend(_split(graph, edges))

    cap = BOUNDARY_FACTOR * math.sqrt(r)
    for _ in range(MAX_BOUNDARY_ROUNDS):
        div = _finish(graph, r, done)
        heavy = [i for i, b in enumerate(div.region_boundary) if len(b) > cap and len(div.regions[i]) > 1]
        if not heavy:
            return div
        bset = div.boundary
        heavy_set = set(heavy)
        done = [list(x) for i, x in enumerate(div.regions) if i not in heavy_set]
        for i in heavy:
            done.extend(_split(graph, div.regions[i], lambda v: 1.0 if v in bset else 0.0))
    return _finish(graph, r, done)
