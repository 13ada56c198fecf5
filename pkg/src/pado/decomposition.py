"""Recursive decomposition by balanced fundamental-cycle separators.

Every non-leaf piece is split by the fundamental cycle of one nontree edge
of a shortest-path tree of the piece.  The cycle's nodes are two root paths
of that tree, so each separator is the union of (at most) two shortest
paths; these are the paths connections are later computed against.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pado.errors import NoSeparator
from pado.graph.embedding import EmbeddedPlanarGraph, triangulate
from pado.graph.paths import ShortestPathTree, sssp


@dataclass(frozen=True)
class SeparatorPath:
    """Shortest path ``nodes[0] .. nodes[-1]`` with cumulative lengths."""

    nodes: tuple[int, ...]
    prefix_dist: tuple[float, ...]

    def __len__(self):
        return len(self.nodes)

    @property
    def last_index(self) -> int:
        return len(self.nodes) - 1


@dataclass(frozen=True)
class Separator:
    paths: tuple[SeparatorPath, ...]
    # endpoints of the nontree edge closing the cycle; None for pieces too
    # small to triangulate
    nontree: tuple[int, int] | None = None

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(v for p in self.paths for v in p.nodes)


@dataclass(frozen=True)
class DecompNode:
    id: int
    nodes: tuple[int, ...]
    separator: Separator | None
    children: tuple[int, ...]
    depth: int
    parent: int

    @property
    def is_leaf(self) -> bool:
        return self.separator is None


@dataclass(frozen=True)
class DecompositionTree:
    nodes: tuple[DecompNode, ...]
    leafmost: tuple[int, ...]
    root: int = 0

    @property
    def depth(self) -> int:
        return max(x.depth for x in self.nodes)

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class FundamentalCycle:
    """Balanced fundamental cycle in a triangulated graph (local ids)."""

    edge: int
    cycle: tuple[int, ...]
    inside: tuple[int, ...]
    outside: tuple[int, ...]


@dataclass
class LocalSeparation:
    """Separator of a (possibly disconnected) piece, in the piece's ids."""

    paths: list[tuple[list[int], list[float]]]
    nontree: tuple[int, int] | None
    cycle: set[int]
    inside: list[int]
    outside: list[int]
    others: list[list[int]] = field(default_factory=list)


def _lca(parent: np.ndarray, depth: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # vectorised binary lifting
    levels = max(1, int(depth.max()).bit_length())
    up = [parent]
    for _ in range(levels - 1):
        up.append(up[-1][up[-1]])
    a = a.copy()
    b = b.copy()
    swap = depth[a] < depth[b]
    a[swap], b[swap] = b[swap], a[swap]
    diff = depth[a] - depth[b]
    for j in range(levels):
        bit = (diff >> j) & 1 == 1
        a[bit] = up[j][a[bit]]
    for j in range(levels - 1, -1, -1):
        ne = up[j][a] != up[j][b]
        a[ne] = up[j][a[ne]]
        b[ne] = up[j][b[ne]]
    return np.where(a == b, a, parent[a])


def find_balanced_fundamental_cycle(
    graph: EmbeddedPlanarGraph,
    tree: ShortestPathTree,
    weights: Sequence[float] | None = None,
    objective: str = "balance",
) -> FundamentalCycle:
    """Pick a nontree edge whose fundamental cycle is a balanced separator.

    ``graph`` must be connected with every face a triangle and ``tree`` must
    span it.  Without ``weights`` the sides are exact node counts (via
    Euler's formula on the disc bounded by each cycle) and the edge
    minimising the larger side wins, ties to the smaller edge id.  With
    ``weights`` each node's weight is charged to one incident face and the
    face-weight split is balanced instead.

    With ``objective="short"`` the shortest cycle (in hops) among those
    keeping both sides within ``2/3`` wins instead, ties to better balance
    and then to the smaller edge id; if no cycle qualifies the balance
    rule applies.

    Raises
    ------
    NoSeparator
        No cycle leaves both sides at most ``2/3`` of the nodes (unweighted
        mode); only possible when the preconditions are violated.
    """
    n = graph.n
    faces = graph.faces()
    if any(len(f) != 3 for f in faces):
        raise NoSeparator("graph is not triangulated")
    face_of = [0] * (2 * graph.edge_count)
    for fi, walk in enumerate(faces):
        for d in walk:
            face_of[d] = fi
    in_tree = [False] * graph.edge_count
    for v, d in enumerate(tree.parent_dart):
        if d >= 0:
            in_tree[d >> 1] = True
    nontree = [e for e in range(graph.edge_count) if not in_tree[e]]
    if not nontree:
        raise NoSeparator("spanning tree has no nontree edge")

    # dual spanning tree over the nontree edges
    dual_adj = [[] for _ in faces]
    for e in nontree:
        f1, f2 = face_of[2 * e], face_of[2 * e + 1]
        dual_adj[f1].append((f2, e))
        dual_adj[f2].append((f1, e))
    dual_parent_edge = [-1] * len(faces)
    seen = [False] * len(faces)
    seen[0] = True
    order = [0]
    for f in order:
        for g, e in dual_adj[f]:
            if not seen[g]:
                seen[g] = True
                dual_parent_edge[g] = e
                order.append(g)
    if len(order) != len(faces):
        raise NoSeparator("nontree edges do not form a dual spanning tree")
    child_face = {}
    for f in order[1:]:
        child_face[dual_parent_edge[f]] = f

    face_parent = [-1] * len(faces)
    for f in order[1:]:
        e = dual_parent_edge[f]
        f1, f2 = face_of[2 * e], face_of[2 * e + 1]
        face_parent[f] = f2 if f1 == f else f1

    if weights is None:
        sub = [1.0] * len(faces)
    else:
        sub = [0.0] * len(faces)
        for v in range(n):
            if graph.first_dart[v] >= 0:
                sub[face_of[graph.first_dart[v]]] += float(weights[v])
    for f in reversed(order[1:]):
        sub[face_parent[f]] += sub[f]

    # primal tree depths and lca for every nontree edge
    par = np.arange(n)
    for v, d in enumerate(tree.parent_dart):
        if d >= 0:
            par[v] = graph.tail(d)
    depth = np.asarray(tree.hop_depth(graph))
    eu = np.fromiter((graph.edge_u[e] for e in nontree), dtype=np.int64, count=len(nontree))
    ev = np.fromiter((graph.edge_v[e] for e in nontree), dtype=np.int64, count=len(nontree))
    lca = _lca(par, depth, eu, ev)
    clen = depth[eu] + depth[ev] - 2 * depth[lca] + 1
    inner = np.fromiter((sub[child_face[e]] for e in nontree), dtype=float, count=len(nontree))
    if weights is None:
        k_in = 1 + (inner - clen) / 2
        k_out = n - clen - k_in
    else:
        total = float(sum(weights))
        k_in = inner
        k_out = total - inner
    worst = np.maximum(k_in, k_out)
    best = int(np.argmin(worst))  # argmin keeps the first, i.e. smallest edge id
    if objective == "short":
        limit = 2 * (n if weights is None else float(sum(weights))) / 3
        ok = np.flatnonzero(worst <= limit)
        if len(ok):
            best = int(ok[np.lexsort((ok, worst[ok], clen[ok]))[0]])
    if weights is None and worst[best] > 2 * n / 3:
        raise NoSeparator(f"best fundamental cycle leaves {worst[best]:.0f} of {n} nodes on one side")
    e = nontree[best]

    u, v = graph.edge_u[e], graph.edge_v[e]
    pu = tree.path_to(graph, u)
    pv = tree.path_to(graph, v)
    split = 0
    while split + 1 < min(len(pu), len(pv)) and pu[split + 1] == pv[split + 1]:
        split += 1
    cycle = pu[split:] + pv[split + 1:][::-1]
    on_cycle = set(cycle)

    # faces of the dual subtree hanging off e lie on one side of the cycle
    children_faces = [[] for _ in faces]
    for f in order[1:]:
        children_faces[face_parent[f]].append(f)
    side = set()
    stack = [child_face[e]]
    while stack:
        f = stack.pop()
        for d in faces[f]:
            x = graph.tail(d)
            if x not in on_cycle:
                side.add(x)
        stack.extend(children_faces[f])
    inside = tuple(sorted(side))
    outside = tuple(x for x in range(n) if x not in side and x not in on_cycle)
    if weights is None and len(inside) != int(round(k_in[best])):
        raise NoSeparator("inconsistent face count; embedding is not planar")
    return FundamentalCycle(edge=e, cycle=tuple(cycle), inside=inside, outside=outside)


def _components(graph: EmbeddedPlanarGraph) -> list[list[int]]:
    seen = [False] * graph.n
    comps = []
    adj = graph.adj
    for s in range(graph.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        for u in comp:
            for v, _, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
        comps.append(sorted(comp))
    return comps


def separate(
    piece: EmbeddedPlanarGraph,
    weights: Sequence[float] | None = None,
    hop_tree: bool = False,
    objective: str = "balance",
) -> LocalSeparation:
    """Separator for a piece: a balanced fundamental cycle of its largest
    component, computed on a retriangulated copy whose shortest-path tree is
    rooted at the component's smallest node.

    With ``hop_tree`` the tree is a breadth-first tree of the triangulated
    copy rooted near its center instead; its paths may use triangulation
    edges and are not shortest paths, which is fine when only the node
    split matters.  ``objective`` is passed to
    :func:`find_balanced_fundamental_cycle`.

    All ids are local to ``piece``.  Other components are returned
    untouched for the caller to distribute.
    """
    comps = _components(piece)
    comps.sort(key=lambda c: (-len(c), c[0]))
    comp, others = comps[0], comps[1:]
    if len(comp) == 1:
        c = comp[0]
        return LocalSeparation([([c], [0.0])], None, {c}, [], [], others)
    edges = [d >> 1 for u in comp for _, _, d in piece.adj[u] if not d & 1]
    if len(comp) == 2:
        a, b = comp
        w = min(piece.length[e] for e in edges)
        return LocalSeparation([([a, b], [0.0, w])], None, {a, b}, [], [], others)
    sub, node_map, _ = piece.subgraph(comp, edges)
    tri = triangulate(sub)
    if hop_tree:
        tree = _center_bfs_tree(tri)
    else:
        tree = sssp(tri, 0)
        m0 = sub.edge_count
        if any(d >= 0 and (d >> 1) >= m0 for d in tree.parent_dart):
            raise NoSeparator("shortest-path tree uses a triangulation edge; piece is not connected")
    local_w = None if weights is None else [weights[v] for v in node_map]
    fc = find_balanced_fundamental_cycle(tri, tree, local_w, objective)
    u, v = tri.edge_u[fc.edge], tri.edge_v[fc.edge]
    pu, pv = tree.path_to(tri, u), tree.path_to(tri, v)
    top = 0
    while top + 1 < min(len(pu), len(pv)) and pu[top + 1] == pv[top + 1]:
        top += 1
    paths = []
    for p in (pu[top:], pv[top:]):
        prefix = [0.0]
        for x in p[1:]:
            prefix.append(prefix[-1] + tri.length[tree.parent_dart[x] >> 1])
        paths.append(([node_map[x] for x in p], prefix))
    if len(paths[0][0]) == 1:
        paths = paths[1:]
    elif len(paths[1][0]) == 1:
        paths = paths[:1]
    return LocalSeparation(
        paths=paths,
        nontree=(node_map[u], node_map[v]),
        cycle={node_map[x] for x in fc.cycle},
        inside=[node_map[x] for x in fc.inside],
        outside=[node_map[x] for x in fc.outside],
        others=others,
    )


def _bfs(adj, root):
    parent = [-1] * len(adj)
    seen = [False] * len(adj)
    seen[root] = True
    order = [root]
    for u in order:
        for v, _, d in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = d
                order.append(v)
    return order, parent


def _center_bfs_tree(graph: EmbeddedPlanarGraph) -> ShortestPathTree:
    """Breadth-first tree rooted at the midpoint of a double-sweep
    diameter path (a cheap approximate center)."""
    adj = graph.adj
    order, _ = _bfs(adj, 0)
    a = order[-1]
    order, parent = _bfs(adj, a)
    path = [order[-1]]
    while parent[path[-1]] >= 0:
        path.append(graph.tail(parent[path[-1]]))
    root = path[len(path) // 2]
    order, parent = _bfs(adj, root)
    hops = [0.0] * graph.n
    for v in order[1:]:
        hops[v] = hops[graph.tail(parent[v])] + 1.0
    return ShortestPathTree(root, tuple(parent), tuple(hops))


def lpt_groups(items: list[list[int]], weight=len, seeds: int = 2) -> tuple[list[int], list[int]]:
    """Distribute node groups over two bins, heaviest first into the lighter
    bin (ties to bin 0); each group stays whole."""
    order = sorted(range(len(items)), key=lambda i: (-weight(items[i]), i))
    bins = ([], [])
    load = [0, 0]
    for i in order:
        k = 0 if load[0] <= load[1] else 1
        bins[k].extend(items[i])
        load[k] += weight(items[i])
    return sorted(bins[0]), sorted(bins[1])


def split_by_cycle(sep: LocalSeparation) -> tuple[list[int], list[int]]:
    """Children of a separated piece: the inside group, the outside group and
    any other components, distributed by node count."""
    return lpt_groups([sep.inside, sep.outside] + sep.others)


def _induced_piece(graph: EmbeddedPlanarGraph, nodes: Sequence[int], stamp: list[int], tag: int):
    for v in nodes:
        stamp[v] = tag
    edges = []
    syn = graph.synthetic
    for u in nodes:
        for v, _, d in graph.adj[u]:
            if not d & 1 and stamp[v] == tag and not syn[d >> 1]:
                edges.append(d >> 1)
    return graph.subgraph(nodes, edges)


def build_decomposition(graph: EmbeddedPlanarGraph) -> DecompositionTree:
    """Decompose ``graph`` down to single-node leaves.

    Pieces carry only non-synthetic edges: triangulation happens per piece
    when its separator is chosen, so separator paths never use synthetic
    edges and all piece distances are real walk lengths.
    """
    n = graph.n
    stamp = [-1] * n
    built: list[dict] = [dict(nodes=tuple(range(n)), depth=0, parent=-1)]
    queue = deque([0])
    leafmost = [-1] * n
    while queue:
        x = queue.popleft()
        rec = built[x]
        nodes = rec["nodes"]
        if len(nodes) <= 1:
            rec["separator"] = None
            rec["children"] = ()
            for v in nodes:
                leafmost[v] = x
            continue
        piece, node_map, _ = _induced_piece(graph, nodes, stamp, x)
        sep = separate(piece)
        paths = tuple(
            SeparatorPath(tuple(node_map[v] for v in p), tuple(pd)) for p, pd in sep.paths
        )
        nontree = None if sep.nontree is None else (node_map[sep.nontree[0]], node_map[sep.nontree[1]])
        rec["separator"] = Separator(paths, nontree)
        for v in sep.cycle:
            leafmost[node_map[v]] = x
        kids = []
        # both children are kept even when empty, as leaves
        for child in split_by_cycle(sep):
            cid = len(built)
            built.append(dict(nodes=tuple(node_map[v] for v in child), depth=rec["depth"] + 1, parent=x))
            kids.append(cid)
            queue.append(cid)
        rec["children"] = tuple(kids)
    nodes = tuple(
        DecompNode(i, r["nodes"], r["separator"], r["children"], r["depth"], r["parent"])
        for i, r in enumerate(built)
    )
    return DecompositionTree(nodes=nodes, leafmost=tuple(leafmost))


def relevant_ancestors(tree: DecompositionTree, v: int) -> list[int]:
    """Ancestors of the leafmost piece containing ``v``, root first,
    including that piece."""
    out = []
    x = tree.leafmost[v]
    while x >= 0:
        out.append(x)
        x = tree.nodes[x].parent
    out.reverse()
    return out


def depth_constant(tree: DecompositionTree, n: int) -> float:
    """Measured ``c_d`` in ``depth <= c_d * log_{3/2} n``."""
    if n <= 1:
        return 0.0
    return tree.depth / math.log(n, 1.5)
