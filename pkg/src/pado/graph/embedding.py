"""Combinatorial embeddings stored as rotation systems over darts.

Edge ``e`` owns two darts: ``2*e`` runs ``u -> v`` and ``2*e + 1`` runs
``v -> u`` where ``(u, v)`` is the edge as given.  The rotation maps every
dart to the next dart counterclockwise around its tail.  Faces are the
orbits of ``d -> rot_next[d ^ 1]``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from pado.errors import (
    Disconnected,
    InvalidGraph,
    NegativeLength,
    NotPlanarEmbedding,
)


class EmbeddedPlanarGraph:
    """Undirected multigraph with a fixed planar rotation system.

    Parameters
    ----------
    n_nodes : int
        Nodes are ``0 .. n_nodes - 1``.
    edges : sequence of (int, int)
        Endpoints of each edge; edge ids are positions in this sequence.
    lengths : sequence of float
        Nonnegative length per edge.
    rotation : sequence of sequence of int, optional
        For each node, its outgoing darts in counterclockwise order.
    coords : sequence of (float, float), optional
        Node positions; used to derive the rotation by angular sort when
        ``rotation`` is not given.
    synthetic : sequence of bool, optional
        Marks edges added by :func:`triangulate`.

    Instances are treated as immutable; all transformations return new
    graphs.
    """

    def __init__(
        self,
        n_nodes: int,
        edges: Sequence[tuple[int, int]],
        lengths: Sequence[float],
        rotation: Sequence[Sequence[int]] | None = None,
        coords: Sequence[tuple[float, float]] | None = None,
        synthetic: Sequence[bool] | None = None,
    ):
        n_nodes = int(n_nodes)
        if n_nodes < 1:
            raise InvalidGraph("graph needs at least one node")
        if len(lengths) != len(edges):
            raise InvalidGraph("one length per edge required")
        self.n = n_nodes
        self.edge_u = [int(u) for u, _ in edges]
        self.edge_v = [int(v) for _, v in edges]
        self.length = [float(x) for x in lengths]
        self.synthetic = [bool(x) for x in synthetic] if synthetic is not None else [False] * len(edges)
        if len(self.synthetic) != len(edges):
            raise InvalidGraph("one synthetic flag per edge required")
        self.coords = [(float(x), float(y)) for x, y in coords] if coords is not None else None
        if self.coords is not None and len(self.coords) != n_nodes:
            raise InvalidGraph("one coordinate pair per node required")
        for e, (u, v) in enumerate(zip(self.edge_u, self.edge_v)):
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise InvalidGraph(f"edge {e} has an endpoint outside 0..{n_nodes - 1}")
            if u == v:
                raise InvalidGraph(f"edge {e} is a self-loop")
        if rotation is None:
            if self.coords is None:
                raise InvalidGraph("either rotation lists or coordinates are required")
            rotation = _rotation_from_coords(self.n, self.edge_u, self.edge_v, self.coords)
        self._set_rotation(rotation)
        self._adj = None

    @classmethod
    def _raw(cls, n, edge_u, edge_v, length, synthetic, rot_next, coords=None):
        # trusted constructor for internally derived graphs; skips all checks
        g = cls.__new__(cls)
        g.n = n
        g.edge_u = edge_u
        g.edge_v = edge_v
        g.length = length
        g.synthetic = synthetic
        g.coords = coords
        g.rot_next = rot_next
        first = [-1] * n
        for d in range(len(rot_next) - 1, -1, -1):
            first[edge_u[d >> 1] if not d & 1 else edge_v[d >> 1]] = d
        g.first_dart = first
        g._adj = None
        return g

    def _set_rotation(self, rotation):
        if len(rotation) != self.n:
            raise NotPlanarEmbedding("one rotation list per node required")
        n_darts = 2 * len(self.edge_u)
        rot_next = [-1] * n_darts
        first = [-1] * self.n
        seen = [False] * n_darts
        for v, darts in enumerate(rotation):
            darts = [int(d) for d in darts]
            for d in darts:
                if not 0 <= d < n_darts:
                    raise NotPlanarEmbedding(f"dart {d} at node {v} does not exist")
                if seen[d]:
                    raise NotPlanarEmbedding(f"dart {d} listed twice")
                if self.tail(d) != v:
                    raise NotPlanarEmbedding(f"dart {d} listed at node {v} but leaves node {self.tail(d)}")
                seen[d] = True
            for a, b in zip(darts, darts[1:] + darts[:1]):
                rot_next[a] = b
            if darts:
                first[v] = darts[0]
        if not all(seen):
            missing = seen.index(False)
            raise NotPlanarEmbedding(f"dart {missing} missing from the rotation of node {self.tail(missing)}")
        self.rot_next = rot_next
        self.first_dart = first

    # basic accessors

    @property
    def node_count(self) -> int:
        return self.n

    @property
    def edge_count(self) -> int:
        return len(self.edge_u)

    def tail(self, d: int) -> int:
        return self.edge_v[d >> 1] if d & 1 else self.edge_u[d >> 1]

    def head(self, d: int) -> int:
        return self.edge_u[d >> 1] if d & 1 else self.edge_v[d >> 1]

    def darts_around(self, v: int) -> list[int]:
        """Outgoing darts of ``v`` in counterclockwise order."""
        d0 = self.first_dart[v]
        if d0 < 0:
            return []
        out = [d0]
        d = self.rot_next[d0]
        while d != d0:
            out.append(d)
            d = self.rot_next[d]
        return out

    def rotation_lists(self) -> list[list[int]]:
        return [self.darts_around(v) for v in range(self.n)]

    @property
    def adj(self) -> list[list[tuple[int, float, int]]]:
        """Per node, ``(neighbor, length, dart)`` in rotation order."""
        if self._adj is None:
            eu, ev, ln, nxt = self.edge_u, self.edge_v, self.length, self.rot_next
            adj = []
            for v in range(self.n):
                row = []
                d0 = self.first_dart[v]
                if d0 >= 0:
                    d = d0
                    while True:
                        e = d >> 1
                        row.append((eu[e] if d & 1 else ev[e], ln[e], d))
                        d = nxt[d]
                        if d == d0:
                            break
                adj.append(row)
            self._adj = adj
        return self._adj

    def face_next(self, d: int) -> int:
        return self.rot_next[d ^ 1]

    def faces(self) -> list[list[int]]:
        """All face walks as dart lists, in order of their smallest dart."""
        nxt = self.rot_next
        seen = [False] * len(nxt)
        faces = []
        for d0 in range(len(nxt)):
            if seen[d0]:
                continue
            walk = []
            d = d0
            while not seen[d]:
                seen[d] = True
                walk.append(d)
                d = nxt[d ^ 1]
            faces.append(walk)
        return faces

    def face_count(self) -> int:
        if not self.edge_u:
            return 1
        return len(self.faces())

    def total_length(self, include_synthetic: bool = False) -> float:
        return math.fsum(x for x, s in zip(self.length, self.synthetic) if include_synthetic or not s)

    def original_edges(self) -> list[int]:
        return [e for e, s in enumerate(self.synthetic) if not s]

    def without_synthetic(self) -> "EmbeddedPlanarGraph":
        """The subgraph of non-synthetic edges, renumbered, same node ids."""
        keep = self.original_edges()
        if len(keep) == self.edge_count:
            return self
        g, _, _ = self.subgraph(range(self.n), keep)
        g.coords = self.coords
        return g

    def subgraph(self, nodes: Iterable[int], edges: Iterable[int]):
        """Embedded subgraph on ``nodes`` with the given edge ids.

        Returns ``(graph, node_map, edge_map)`` where local node ``i`` is
        global node ``node_map[i]`` (ascending) and local edge ``j`` is global
        edge ``edge_map[j]``.  Rotations are restricted, so the result stays
        planar.
        """
        node_map = sorted(set(nodes))
        local = {v: i for i, v in enumerate(node_map)}
        edge_map = sorted(set(edges))
        eu, ev = self.edge_u, self.edge_v
        new_u = [local[eu[e]] for e in edge_map]
        new_v = [local[ev[e]] for e in edge_map]
        new_len = [self.length[e] for e in edge_map]
        new_syn = [self.synthetic[e] for e in edge_map]
        ledge = {e: j for j, e in enumerate(edge_map)}
        rot_next = [-1] * (2 * len(edge_map))
        nxt = self.rot_next
        for v in node_map:
            d0 = self.first_dart[v]
            if d0 < 0:
                continue
            kept = []
            d = d0
            while True:
                j = ledge.get(d >> 1)
                if j is not None:
                    kept.append(2 * j + (d & 1))
                d = nxt[d]
                if d == d0:
                    break
            for a, b in zip(kept, kept[1:] + kept[:1]):
                rot_next[a] = b
        g = EmbeddedPlanarGraph._raw(len(node_map), new_u, new_v, new_len, new_syn, rot_next)
        return g, node_map, edge_map

    def __repr__(self):
        return f"EmbeddedPlanarGraph(n={self.n}, m={self.edge_count})"

    def __eq__(self, other):
        if not isinstance(other, EmbeddedPlanarGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edge_u == other.edge_u
            and self.edge_v == other.edge_v
            and self.length == other.length
            and self.synthetic == other.synthetic
            and self.rotation_lists() == other.rotation_lists()
        )

    __hash__ = None


def _rotation_from_coords(n, edge_u, edge_v, coords):
    around = [[] for _ in range(n)]
    for e, (u, v) in enumerate(zip(edge_u, edge_v)):
        (ux, uy), (vx, vy) = coords[u], coords[v]
        around[u].append((math.atan2(vy - uy, vx - ux), 2 * e))
        around[v].append((math.atan2(uy - vy, ux - vx), 2 * e + 1))
    return [[d for _, d in sorted(lst)] for lst in around]


@dataclass(frozen=True)
class Diagnostics:
    node_count: int
    edge_count: int
    face_count: int
    connected: bool
    synthetic_edges: int
    all_faces_triangles: bool


def connected_components(graph: EmbeddedPlanarGraph) -> list[list[int]]:
    seen = [False] * graph.n
    comps = []
    adj = graph.adj
    for s in range(graph.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, _, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def validate(graph: EmbeddedPlanarGraph) -> Diagnostics:
    """Check every embedded-planar-graph invariant.

    Raises
    ------
    NegativeLength
        Some length is negative or not finite.
    Disconnected
        More than one connected component.
    NotPlanarEmbedding
        ``V - E + F != 2`` for the traced faces.
    """
    for e, x in enumerate(graph.length):
        if not math.isfinite(x) or x < 0:
            raise NegativeLength(f"edge {e} has length {x!r}")
    comps = connected_components(graph)
    if len(comps) > 1:
        raise Disconnected(f"graph has {len(comps)} connected components")
    faces = graph.faces()
    f = len(faces) if graph.edge_count else 1
    euler = graph.n - graph.edge_count + f
    if euler != 2:
        raise NotPlanarEmbedding(f"Euler characteristic is {euler}, expected 2 (faces={f})")
    return Diagnostics(
        node_count=graph.n,
        edge_count=graph.edge_count,
        face_count=f,
        connected=True,
        synthetic_edges=sum(graph.synthetic),
        all_faces_triangles=all(len(w) == 3 for w in faces),
    )


def triangulate(graph: EmbeddedPlanarGraph) -> EmbeddedPlanarGraph:
    """Add synthetic edges until every face walk has exactly three darts.

    Added edges get length ``1 + sum of non-synthetic lengths`` so no
    shortest path between original nodes uses one.  Parallel edges may be
    created; self-loops never are.  Graphs with fewer than three nodes are
    returned unchanged since they cannot be triangulated.
    """
    if graph.n < 3 or not graph.edge_count:
        return graph
    big = 1.0 + graph.total_length()
    eu, ev = list(graph.edge_u), list(graph.edge_v)
    length, syn = list(graph.length), list(graph.synthetic)
    nxt = list(graph.rot_next)
    prv = [0] * len(nxt)
    for a, b in enumerate(nxt):
        prv[b] = a

    def tail(d):
        return ev[d >> 1] if d & 1 else eu[d >> 1]

    for walk in graph.faces():
        k = len(walk)
        if k <= 3:
            continue
        succ = {walk[i]: walk[(i + 1) % k] for i in range(k)}
        pred = {b: a for a, b in succ.items()}
        cur = walk[0]
        stalled = 0
        while k > 3:
            d1 = succ[cur]
            d2 = succ[d1]
            if tail(cur) == tail(d2):
                cur = d1
                stalled += 1
                if stalled > k:
                    raise NotPlanarEmbedding("face walk cannot be triangulated without self-loops")
                continue
            stalled = 0
            e = len(eu)
            eu.append(tail(cur))
            ev.append(tail(d2))
            length.append(big)
            syn.append(True)
            a, b = 2 * e, 2 * e + 1
            nxt.extend((0, 0))
            prv.extend((0, 0))
            # a goes just before cur around tail(cur)
            p = prv[cur]
            nxt[p], prv[a], nxt[a], prv[cur] = a, p, cur, a
            # b goes just after twin(d1) around tail(d2)
            t = d1 ^ 1
            q = nxt[t]
            nxt[t], prv[b], nxt[b], prv[q] = b, t, q, b
            before = pred.pop(cur)
            del succ[cur], succ[d1], pred[d1]
            succ[before], pred[a] = a, before
            succ[a], pred[d2] = d2, a
            cur = a
            k -= 1
    g = EmbeddedPlanarGraph._raw(graph.n, eu, ev, length, syn, nxt, graph.coords)
    return g
