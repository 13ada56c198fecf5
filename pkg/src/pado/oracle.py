"""Preprocessing and queries for the approximate distance oracle.

Connections are stored only for boundary nodes of an r-division with
``r = ell ** 2``.  A query searches the home regions of ``s`` and ``t``
exactly, then joins the two sides through the connections their boundary
nodes hold on a common separator path.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as cs_dijkstra

from pado.connections import ENGINES, MODES, AuditLog, Connection, path_connections
from pado.decomposition import (
    DecompositionTree,
    SeparatorPath,
    _induced_piece,
    build_decomposition,
)
from pado.errors import InvalidParams, UnknownNode, UnreachableNode
from pado.graph.embedding import EmbeddedPlanarGraph, validate
from pado.graph.paths import dijkstra
from pado.rdivision import RDivision, compute_rdivision

INF = math.inf


@dataclass(frozen=True)
class OracleParams:
    """Accuracy and size parameters.

    ``ell = max(1, round(c_ell * ln(n) / epsilon))`` clamped to ``n``, and
    ``r = ell ** 2`` is the region size of the r-division.
    """

    epsilon: float
    c_ell: float
    ell: int
    r: int

    @classmethod
    def for_graph(cls, epsilon: float, c_ell: float, n: int) -> "OracleParams":
        for name, x in (("epsilon", epsilon), ("c_ell", c_ell)):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x) or x <= 0:
                raise InvalidParams(f"{name} must be a positive finite number, got {x!r}")
        ell = max(1, round(c_ell * math.log(max(n, 1)) / epsilon))
        ell = min(ell, max(n, 1))
        return cls(float(epsilon), float(c_ell), int(ell), int(ell * ell))


class Witness(NamedTuple):
    """Which candidate produced an estimate.

    ``kind`` is ``"same-node"``, ``"intra-region"``, ``"shared-boundary"``
    (through boundary node ``b_s == b_t`` on no separator) or ``"path"``
    (through connections of ``b_s`` and ``b_t`` on path ``sel`` of
    decomposition node ``x``).
    """

    kind: str
    b_s: int = -1
    b_t: int = -1
    x: int = -1
    sel: int = -1


@dataclass(frozen=True)
class QueryResult:
    estimate: float
    witness: Witness | None
    scanned_nodes: int
    scanned_connections: int


def merge_scan(C: Iterable[tuple], prefix: Sequence[float], witness: bool = False):
    """Best join of s-side and t-side connections along one path.

    Parameters
    ----------
    C : iterable of tuple
        ``(position, side, value)`` or ``(position, side, value, tag)``
        sorted by position; ``side`` is 0 for the s-side and 1 for the
        t-side, ``value`` is ``dist(s, b) + dist(b, p)`` (or the t analog).
    prefix : sequence of float
        Cumulative path lengths.
    witness : bool
        Also return the tags of the minimising s-side and t-side elements.

    Returns
    -------
    float or (float, (tag, tag))
        ``min`` over s/t pairs of ``v_s + |prefix[p_s] - prefix[p_t]| + v_t``;
        ``inf`` when either side is empty.
    """
    m_s = m_t = d = INF
    w_s = w_t = best = None
    hat = 0
    for item in C:
        p, side, value = item[0], item[1], item[2]
        step = prefix[p] - prefix[hat]
        m_s += step
        m_t += step
        hat = p
        tag = item[3] if len(item) > 3 else None
        if side == 0:
            if value < m_s:
                m_s, w_s = value, tag
        elif value < m_t:
            m_t, w_t = value, tag
        if m_s + m_t < d:
            d = m_s + m_t
            best = (w_s, w_t)
    return (d, best) if witness else d


def _grouped_join(gid, pos, side, val, pre, n_groups):
    """Vectorised :func:`merge_scan` over many paths at once.

    Elements are sorted by ``(gid, pos, side)``.  Returns the per-group
    minimum.  ``pre`` is the prefix length at each element's position.
    """
    starts = np.searchsorted(gid, np.arange(n_groups))
    rank = np.arange(len(gid)) - starts[gid]
    width = int(rank.max()) + 1 if len(rank) else 1
    is_s = side == 0
    out = np.full(n_groups, INF)
    for first in (is_s, ~is_s):
        # pairs whose ``first`` element comes earlier along the path
        M = np.full((n_groups, width), INF)
        M[gid[first], rank[first]] = val[first] - pre[first]
        np.minimum.accumulate(M, axis=1, out=M)
        second = ~first
        cand = M[gid[second], rank[second]] + val[second] + pre[second]
        np.minimum.at(out, gid[second], cand)
    return out


class _Region:
    __slots__ = ("nodes", "csr", "boundary", "boundary_local")

    def __init__(self, u, v, w, nodes, boundary):
        self.nodes = nodes
        k = len(nodes)
        if len(u):
            lu = np.searchsorted(nodes, u)
            lv = np.searchsorted(nodes, v)
            rows = np.concatenate([lu, lv])
            cols = np.concatenate([lv, lu])
            data = np.concatenate([w, w])
            order = np.lexsort((data, cols, rows))
            rows, cols, data = rows[order], cols[order], data[order]
            keep = np.ones(len(rows), dtype=bool)
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            self.csr = csr_matrix((data[keep], (rows[keep], cols[keep])), shape=(k, k))
        else:
            self.csr = csr_matrix((k, k))
        self.boundary = boundary
        self.boundary_local = np.searchsorted(nodes, boundary)


class DistanceOracle:
    """Immutable oracle; build with :func:`preprocess` or load with
    :func:`pado.storage.load`.

    Attributes
    ----------
    n : int
    params : OracleParams
    region_edges : tuple of (u, v, length) arrays
        Edges of each region, global node ids.
    region_boundary : tuple of int arrays
        Boundary nodes of each region, ascending.
    home_region : int array
    decomposition : DecompositionTree
        Separator paths, parents and depths; piece node sets are dropped.
    store : dict
        ``store[b][(x, sel)]`` is the tuple of connections of boundary node
        ``b`` on path ``sel`` of decomposition node ``x``.
    """

    def __init__(self, n, params, region_edges, region_boundary, home_region, decomposition, store):
        self.n = int(n)
        self.params = params
        self.region_edges = tuple(region_edges)
        self.region_boundary = tuple(np.asarray(b, dtype=np.int64) for b in region_boundary)
        self.home_region = np.asarray(home_region, dtype=np.int64)
        self.decomposition = decomposition
        self.store = store
        self.boundary = frozenset(int(b) for b in store)
        self._regions: dict[int, _Region] = {}
        self._build_index()

    # -- index structures -------------------------------------------------

    def _build_index(self):
        nd = len(self.decomposition.nodes)
        offsets = np.zeros(2 * nd + 1, dtype=np.int64)
        flat = []
        for x in self.decomposition.nodes:
            paths = x.separator.paths if x.separator is not None else ()
            for sel in range(2):
                k = 2 * x.id + sel
                pre = paths[sel].prefix_dist if sel < len(paths) else ()
                flat.extend(pre)
                offsets[k + 1] = len(pre)
        self._offsets = np.cumsum(offsets)
        self._flat_prefix = np.asarray(flat, dtype=float)
        packed = {}
        for b, entry in self.store.items():
            keys, pos, dist = [], [], []
            for (x, sel), conns in sorted(entry.items()):
                for c in conns:
                    keys.append(2 * x + sel)
                    pos.append(c.path_index)
                    dist.append(c.dist)
            packed[b] = (
                np.asarray(keys, dtype=np.int64),
                np.asarray(pos, dtype=np.int64),
                np.asarray(dist, dtype=float),
            )
        self._packed = packed

    def _region(self, rid: int) -> _Region:
        reg = self._regions.get(rid)
        if reg is None:
            u, v, w = self.region_edges[rid]
            nodes = np.unique(np.concatenate([u, v])) if len(u) else np.flatnonzero(self.home_region == rid)
            reg = _Region(u, v, w, nodes, self.region_boundary[rid])
            self._regions[rid] = reg
        return reg

    # -- accounting -------------------------------------------------------

    @property
    def connection_count(self) -> int:
        return sum(len(c) for e in self.store.values() for c in e.values())

    def prefix(self, x: int, sel: int) -> np.ndarray:
        k = 2 * x + sel
        return self._flat_prefix[self._offsets[k] : self._offsets[k + 1]]

    def __eq__(self, other):
        if not isinstance(other, DistanceOracle):
            return NotImplemented
        from pado.storage import to_bytes

        return to_bytes(self) == to_bytes(other)

    __hash__ = None

    # -- queries ----------------------------------------------------------

    def _check(self, v):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < self.n:
            raise UnknownNode(f"no node {v!r}")
        return int(v)

    def _side(self, v):
        reg = self._region(int(self.home_region[v]))
        local = int(np.searchsorted(reg.nodes, v))
        dist = cs_dijkstra(reg.csr, directed=True, indices=local)
        return reg, dist

    def query(self, s: int, t: int, method: str = "vector") -> QueryResult:
        """Estimate ``dist(s, t)`` within a factor ``1 + epsilon``.

        Parameters
        ----------
        s, t : int
        method : {"vector", "loop"}
            ``"loop"`` runs :func:`merge_scan` per path on a k-way merge
            of the pre-sorted connection lists; ``"vector"`` evaluates the
            same joins with array operations.

        Raises
        ------
        UnknownNode
        """
        s, t = self._check(s), self._check(t)
        if method not in ("vector", "loop"):
            raise InvalidParams(f"unknown method {method!r}")
        if s == t:
            return QueryResult(0.0, Witness("same-node"), 0, 0)
        reg_s, ds = self._side(s)
        reg_t, dt = self._side(t)
        scanned = int(np.count_nonzero(np.isfinite(ds)) + np.count_nonzero(np.isfinite(dt)))
        best, wit = INF, None

        for reg, dist, other in ((reg_s, ds, t), (reg_t, dt, s)):
            k = int(np.searchsorted(reg.nodes, other))
            if k < len(reg.nodes) and reg.nodes[k] == other and dist[k] < best:
                best, wit = float(dist[k]), Witness("intra-region")

        bs = {int(b): float(x) for b, x in zip(reg_s.boundary, ds[reg_s.boundary_local]) if x < INF}
        bt = {int(b): float(x) for b, x in zip(reg_t.boundary, dt[reg_t.boundary_local]) if x < INF}
        for b in sorted(bs.keys() & bt.keys()):
            if bs[b] + bt[b] < best:
                best, wit = bs[b] + bt[b], Witness("shared-boundary", b, b)

        if method == "loop":
            d, w, count = self._join_loop(bs, bt)
        else:
            d, w, count = self._join_vector(bs, bt)
        if d < best:
            best, wit = d, w
        return QueryResult(float(best), wit, scanned, count)

    def estimate(self, s: int, t: int) -> float:
        return self.query(s, t).estimate

    def _join_loop(self, bs, bt):
        lists: dict[tuple[int, int], list] = {}
        for side, bmap in ((0, bs), (1, bt)):
            for b, db in bmap.items():
                for key, conns in self.store.get(b, {}).items():
                    slot = lists.setdefault(key, ([], []))
                    slot[side].append([(c.path_index, side, db + c.dist, b) for c in conns])
        best, wit, count = INF, None, 0
        for key in sorted(lists):
            s_lists, t_lists = lists[key]
            if not s_lists or not t_lists:
                continue
            count += sum(map(len, s_lists)) + sum(map(len, t_lists))
            seq = heapq.merge(*s_lists, *t_lists)
            d, pair = merge_scan(seq, self.prefix(*key), witness=True)
            if d < best:
                best, wit = d, Witness("path", pair[0], pair[1], key[0], key[1])
        return best, wit, count

    def _gather(self, bmap):
        parts = [(self._packed[b], db, b) for b, db in bmap.items() if b in self._packed]
        if not parts:
            e = np.zeros(0, dtype=np.int64)
            return e, e, np.zeros(0), e
        keys = np.concatenate([p[0][0] for p in parts])
        pos = np.concatenate([p[0][1] for p in parts])
        val = np.concatenate([p[0][2] + p[1] for p in parts])
        tag = np.concatenate([np.full(len(p[0][0]), p[2], dtype=np.int64) for p in parts])
        return keys, pos, val, tag

    def _join_vector(self, bs, bt):
        ks, ps, vs, ts = self._gather(bs)
        kt, pt, vt, tt = self._gather(bt)
        common = np.intersect1d(ks, kt)
        if not len(common):
            return INF, None, 0
        ms, mt = np.isin(ks, common), np.isin(kt, common)
        keys = np.concatenate([ks[ms], kt[mt]])
        pos = np.concatenate([ps[ms], pt[mt]])
        val = np.concatenate([vs[ms], vt[mt]])
        tag = np.concatenate([ts[ms], tt[mt]])
        side = np.concatenate([np.zeros(ms.sum(), dtype=np.int64), np.ones(mt.sum(), dtype=np.int64)])
        order = np.lexsort((side, pos, keys))
        keys, pos, val, tag, side = keys[order], pos[order], val[order], tag[order], side[order]
        gid = np.searchsorted(common, keys)
        pre = self._flat_prefix[self._offsets[keys] + pos]
        per_key = _grouped_join(gid, pos, side, val, pre, len(common))
        g = int(np.argmin(per_key))
        d = float(per_key[g])
        if d == INF:
            return INF, None, len(keys)
        # recover the witness pair on the winning path only
        sel = gid == g
        seq = zip(pos[sel].tolist(), side[sel].tolist(), val[sel].tolist(), tag[sel].tolist())
        key = int(common[g])
        _, pair = merge_scan(seq, self.prefix(key >> 1, key & 1), witness=True)
        return d, Witness("path", pair[0], pair[1], key >> 1, key & 1), len(keys)


def _strip(tree: DecompositionTree) -> DecompositionTree:
    nodes = tuple(replace(x, nodes=()) for x in tree.nodes)
    return DecompositionTree(nodes=nodes, leafmost=tree.leafmost)


def preprocess(
    graph: EmbeddedPlanarGraph,
    epsilon: float = 0.5,
    c_ell: float = 1.0,
    mode: str = "cut",
    engine: str = "table",
    audit: AuditLog | None = None,
    decomposition: DecompositionTree | None = None,
    rdivision: RDivision | None = None,
) -> DistanceOracle:
    """Build the oracle.

    Parameters
    ----------
    graph : EmbeddedPlanarGraph
        Connected embedded planar graph; synthetic edges are ignored.
    epsilon : float
        Stretch parameter.
    c_ell : float
        Scale of ``ell`` (see :class:`OracleParams`).
    mode, engine : str
        Passed to :func:`pado.connections.path_connections`.
    audit : AuditLog, optional
        Collects connection-count and potential audits of every sweep.
    decomposition, rdivision : optional
        Prebuilt structures for ``graph`` (both depend only on the graph
        and, for the r-division, on ``r``).

    Raises
    ------
    InvalidGraph
        ``graph`` fails validation.
    InvalidParams
    """
    if any(graph.synthetic):
        graph = graph.without_synthetic()
    validate(graph)
    if mode not in MODES:
        raise InvalidParams(f"unknown mode {mode!r}")
    if engine not in ENGINES:
        raise InvalidParams(f"unknown engine {engine!r}")
    params = OracleParams.for_graph(epsilon, c_ell, graph.n)
    tree = decomposition if decomposition is not None else build_decomposition(graph)
    div = rdivision if rdivision is not None and rdivision.r == params.r else compute_rdivision(graph, params.r)
    boundary = div.boundary

    store: dict[int, dict[tuple[int, int], tuple[Connection, ...]]] = {b: {} for b in sorted(boundary)}
    stamp = [-1] * graph.n
    for x in tree.nodes:
        if x.separator is None:
            continue
        designated = [v for v in x.nodes if v in boundary]
        if not designated:
            continue
        piece, node_map, _ = _induced_piece(graph, x.nodes, stamp, x.id)
        local = {v: i for i, v in enumerate(node_map)}
        for sel, path in enumerate(x.separator.paths):
            lpath = SeparatorPath(tuple(local[v] for v in path.nodes), path.prefix_dist)
            res = path_connections(
                piece, [local[v] for v in designated], lpath, params.epsilon, mode=mode, engine=engine, audit=audit
            )
            for lv, conns in res.items():
                if conns:
                    store[node_map[lv]][(x.id, sel)] = conns

    eu = np.asarray(graph.edge_u, dtype=np.int64)
    ev = np.asarray(graph.edge_v, dtype=np.int64)
    ew = np.asarray(graph.length, dtype=float)
    region_edges = []
    for reg in div.regions:
        idx = np.asarray(reg, dtype=np.int64)
        region_edges.append((eu[idx], ev[idx], ew[idx]))
    return DistanceOracle(
        n=graph.n,
        params=params,
        region_edges=region_edges,
        region_boundary=[np.asarray(b, dtype=np.int64) for b in div.region_boundary],
        home_region=div.home_region,
        decomposition=_strip(tree),
        store=store,
    )


def query(oracle: DistanceOracle, s: int, t: int) -> QueryResult:
    """Functional form of :meth:`DistanceOracle.query`."""
    return oracle.query(s, t)


def exact_distance(graph: EmbeddedPlanarGraph, s: int, t: int) -> float:
    """Exact shortest-path distance by Dijkstra.

    Raises
    ------
    UnknownNode
    UnreachableNode
    """
    for v in (s, t):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < graph.n:
            raise UnknownNode(f"no node {v!r}")
    if s == t:
        return 0.0
    dist, _ = dijkstra(graph.adj, [int(s)])
    if dist[t] == INF:
        raise UnreachableNode(f"node {t} unreachable from {s}")
    return dist[t]
