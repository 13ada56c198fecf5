"""Structural audits shared by the module tests and the acceptance suite.

Each audit returns a list of human-readable violations (empty when the
structure is sound) so callers can both assert and report.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as cs_dijkstra


def rdivision_violations(graph, div, max_c_r=2.0):
    out = []
    owner = Counter(e for reg in div.regions for e in reg)
    if sorted(owner) != list(range(graph.edge_count)):
        out.append("regions do not cover every edge")
    if any(c != 1 for c in owner.values()):
        out.append("an edge lies in more than one region")
    mult = Counter()
    for reg in div.regions:
        for v in {x for e in reg for x in (graph.edge_u[e], graph.edge_v[e])}:
            mult[v] += 1
    expected = {v for v, c in mult.items() if c > 1}
    if set(div.boundary) != expected:
        out.append("boundary differs from the multiplicity count")
    for i, reg in enumerate(div.regions):
        nodes = {x for e in reg for x in (graph.edge_u[e], graph.edge_v[e])}
        if set(div.region_boundary[i]) != nodes & expected:
            out.append(f"region {i} boundary inconsistent")
        if len(reg) > max_c_r * div.r:
            out.append(f"region {i} has {len(reg)} edges > {max_c_r} r")
    for v in range(graph.n):
        h = div.home_region[v]
        homes = [i for i, reg in enumerate(div.region_nodes) if v in reg]
        if homes and h != homes[0]:
            out.append(f"home region of {v} is {h}, lowest is {homes[0]}")
    return out


def piece_csr(graph, nodes):
    """Induced non-synthetic subgraph on ``nodes`` as CSR in local ids,
    parallel edges reduced to the shortest."""
    local = {v: i for i, v in enumerate(nodes)}
    best = {}
    for e in range(graph.edge_count):
        a, b = graph.edge_u[e], graph.edge_v[e]
        if graph.synthetic[e] or a not in local or b not in local:
            continue
        for key in ((local[a], local[b]), (local[b], local[a])):
            best[key] = min(graph.length[e], best.get(key, math.inf))
    k = len(nodes)
    if not best:
        return csr_matrix((k, k)), local
    rows, cols = zip(*best)
    return csr_matrix((np.asarray(list(best.values())), (rows, cols)), shape=(k, k)), local


def decomposition_violations(graph, tree, sample_pairs=None, rng=None):
    out = []
    adj_pairs = {(graph.edge_u[e], graph.edge_v[e]) for e in range(graph.edge_count) if not graph.synthetic[e]}
    adj_pairs |= {(b, a) for a, b in adj_pairs}
    seen = Counter()
    for x in tree.nodes:
        piece = set(x.nodes)
        if x.separator is None:
            if len(piece) > 1:
                out.append(f"leaf {x.id} holds {len(piece)} nodes")
            seen.update(piece)
            continue
        sep = set(x.separator.nodes)
        seen.update(sep)
        if not sep <= piece:
            out.append(f"separator of {x.id} leaves its piece")
        kids = [set(tree.nodes[c].nodes) for c in x.children]
        union = set().union(*kids) if kids else set()
        if union | sep != piece or sum(map(len, kids)) + len(sep) != len(piece):
            out.append(f"children of {x.id} do not partition piece minus separator")
        for c in kids:
            if 3 * len(c) > 2 * len(piece):
                out.append(f"child of {x.id} holds {len(c)} of {len(piece)} nodes")
        if len(kids) == 2:
            a, b = kids
            small, big = (a, b) if len(a) <= len(b) else (b, a)
            for u in small:
                for v, _, _ in graph.adj[u]:
                    if v in big and (u, v) in adj_pairs:
                        out.append(f"cross edge {u}-{v} under {x.id}")
        csr, local = piece_csr(graph, x.nodes)
        for path in x.separator.paths:
            p = list(path.nodes)
            pre = list(path.prefix_dist)
            if pre[0] != 0.0 or len(pre) != len(p):
                out.append(f"bad prefix on {x.id}")
                continue
            for a, b in zip(p, p[1:]):
                if (a, b) not in adj_pairs:
                    out.append(f"separator step {a}-{b} of {x.id} is not an original edge")
            idx = range(len(p))
            if sample_pairs is not None and len(p) > 30:
                pick = rng.integers(0, len(p), size=(sample_pairs, 2))
                pairs = [tuple(q) for q in pick.tolist()]
            else:
                pairs = [(i, j) for i in idx for j in idx if i < j]
            srcs = sorted({i for i, _ in pairs})
            if not srcs:
                continue
            D = cs_dijkstra(csr, directed=False, indices=[local[p[i]] for i in srcs])
            row = {i: k for k, i in enumerate(srcs)}
            for i, j in pairs:
                d = D[row[i], local[p[j]]]
                if not math.isclose(abs(pre[j] - pre[i]), d, rel_tol=1e-9, abs_tol=1e-12):
                    out.append(f"path of {x.id}: prefix {abs(pre[j] - pre[i])} vs piece distance {d}")
                    break
    extra = [v for v in range(graph.n) if seen[v] != 1]
    if extra:
        out.append(f"{len(extra)} nodes not in exactly one separator or leaf")
    return out
