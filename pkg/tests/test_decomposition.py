import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pado.decomposition import (
    LocalSeparation,
    build_decomposition,
    depth_constant,
    find_balanced_fundamental_cycle,
    relevant_ancestors,
    separate,
    split_by_cycle,
)
from pado.graph import EmbeddedPlanarGraph, delaunay, grid, random_triangulation, sssp, triangulate
from audits import decomposition_violations
from conftest import all_pairs


def triangle():
    return EmbeddedPlanarGraph(3, [(0, 1), (1, 2), (2, 0)], [1.0] * 3, coords=[(0, 0), (1, 0), (0, 1)])


def k4():
    edges = [(0, 1), (1, 2), (2, 0), (3, 0), (3, 1), (3, 2)]
    return EmbeddedPlanarGraph(4, edges, [1.0] * 6, coords=[(0, 0), (4, 0), (2, 4), (2, 1)])


def sides_of(graph, tree, e):
    fc_nodes = set(tree.path_to(graph, graph.edge_u[e])) | set(tree.path_to(graph, graph.edge_v[e]))
    return fc_nodes


class TestFundamentalCycle:
    def test_k4_every_tree(self):
        g = k4()
        for root in range(4):
            tree = sssp(g, root)
            fc = find_balanced_fundamental_cycle(g, tree)
            assert len(fc.inside) <= 2 and len(fc.outside) <= 2
            assert set(fc.cycle) | set(fc.inside) | set(fc.outside) == set(range(4))

    def test_k4_some_edge_balanced_by_enumeration(self):
        g = k4()
        tree = sssp(g, 0)
        nontree = [e for e in range(6) if 2 * e not in tree.parent_dart and 2 * e + 1 not in tree.parent_dart]
        ok = [e for e in nontree if 4 - len(sides_of(g, tree, e)) <= 2]
        assert ok

    def test_triangulated_grid(self):
        t = triangulate(grid(5))
        fc = find_balanced_fundamental_cycle(t, sssp(t, 0))
        assert len(fc.inside) <= 16 and len(fc.outside) <= 16
        assert not set(fc.inside) & set(fc.outside)

    def test_single_triangle(self):
        g = triangle()
        fc = find_balanced_fundamental_cycle(g, sssp(g, 0))
        assert sorted(fc.cycle) == [0, 1, 2]
        assert fc.inside == () and fc.outside == ()

    @settings(max_examples=30)
    @given(st.integers(4, 150), st.integers(0, 10**6))
    def test_balanced_on_random_triangulations(self, n, seed):
        g = random_triangulation(n, seed=seed)
        fc = find_balanced_fundamental_cycle(g, sssp(g, 0))
        assert 3 * max(len(fc.inside), len(fc.outside)) <= 2 * n
        assert len(fc.cycle) + len(fc.inside) + len(fc.outside) == n


class TestSplit:
    def test_triangle_two_empty_children(self):
        a, b = split_by_cycle(separate(triangle()))
        assert a == [] and b == []

    def test_grid_split_partitions(self):
        g = grid(5)
        sep = separate(g)
        a, b = split_by_cycle(sep)
        assert set(a) | set(b) | sep.cycle == set(range(25))
        assert not set(a) & set(b)
        for e in range(g.edge_count):
            u, v = g.edge_u[e], g.edge_v[e]
            assert not ((u in a and v in b) or (u in b and v in a))

    def test_disconnected_insides_grouped(self):
        # two inner components enclosed by the cycle land in the same child
        sep = LocalSeparation([([0, 1, 2], [0.0, 1.0, 2.0])], (0, 2), {0, 1, 2}, [3, 4, 5, 6, 7, 8], [])
        a, b = split_by_cycle(sep)
        assert sorted(a + b) == [3, 4, 5, 6, 7, 8]
        assert a == [] or b == []
        # separate components are kept whole
        sep = LocalSeparation([([0, 1, 2], [0.0, 1.0, 2.0])], (0, 2), {0, 1, 2}, [3, 4, 5], [], [[6, 7, 8]])
        a, b = split_by_cycle(sep)
        assert {tuple(a), tuple(b)} == {(3, 4, 5), (6, 7, 8)}


class TestBuild:
    def test_single_node(self):
        g = EmbeddedPlanarGraph(1, [], [], coords=[(0, 0)])
        tree = build_decomposition(g)
        assert len(tree) == 1 and tree.nodes[0].is_leaf and tree.leafmost == (0,)

    def test_triangle(self):
        tree = build_decomposition(triangle())
        root = tree.nodes[0]
        assert root.separator.nodes == frozenset({0, 1, 2})
        assert len(root.children) == 2
        assert all(tree.nodes[c].is_leaf and tree.nodes[c].nodes == () for c in root.children)

    def test_grid10(self):
        g = grid(10)
        tree = build_decomposition(g)
        assert decomposition_violations(g, tree) == []
        c_d = depth_constant(tree, g.n)
        assert tree.depth <= c_d * math.log(100, 1.5) + 1e-9
        assert c_d < 1.0

    @pytest.mark.parametrize(
        "graph",
        [
            delaunay(300, seed=4),
            delaunay(200, lengths="uniform", seed=5),
            random_triangulation(250, seed=6),
            grid(12, lengths="uniform", seed=7),
            grid(4, 30),
        ],
    )
    def test_invariants(self, graph):
        tree = build_decomposition(graph)
        assert decomposition_violations(graph, tree) == []
        assert build_decomposition(graph) == tree

    def test_no_synthetic_edges_in_paths(self):
        g = triangulate(delaunay(150, seed=8))
        tree = build_decomposition(g)
        syn = {(g.edge_u[e], g.edge_v[e]) for e in range(g.edge_count) if g.synthetic[e]}
        orig = {(g.edge_u[e], g.edge_v[e]) for e in range(g.edge_count) if not g.synthetic[e]}
        orig |= {(b, a) for a, b in orig}
        for x in tree.nodes:
            for p in x.separator.paths if x.separator else ():
                assert all((a, b) in orig for a, b in zip(p.nodes, p.nodes[1:]))
        assert syn


class TestRelevantAncestors:
    def test_root_separator_node(self):
        g = grid(6)
        tree = build_decomposition(g)
        v = next(iter(tree.nodes[0].separator.nodes))
        assert relevant_ancestors(tree, v) == [0]

    def test_leaf_node_full_path(self):
        g = delaunay(200, seed=2)
        tree = build_decomposition(g)
        leaf = next(x for x in tree.nodes if x.is_leaf and x.nodes)
        v = leaf.nodes[0]
        chain = relevant_ancestors(tree, v)
        assert chain[0] == 0 and chain[-1] == leaf.id
        assert all(tree.nodes[b].parent == a for a, b in zip(chain, chain[1:]))

    def test_length_bounded_by_depth(self):
        g = delaunay(200, seed=2)
        tree = build_decomposition(g)
        assert all(len(relevant_ancestors(tree, v)) <= tree.depth + 1 for v in range(g.n))


def shortest_path(graph, s, t):
    return sssp(graph, s).path_to(graph, t)


@pytest.mark.parametrize("graph", [grid(6), delaunay(60, seed=3), random_triangulation(50, seed=1)])
def test_most_relevant_piece_contains_path(graph):
    # descend from the root until the separator meets the path; the piece
    # there must hold the whole path
    tree = build_decomposition(graph)
    rng = np.random.default_rng(0)
    for s, t in rng.integers(0, graph.n, size=(150, 2)).tolist():
        q = set(shortest_path(graph, s, t))
        x = tree.nodes[0]
        while x.separator is not None and not (q & x.separator.nodes):
            kids = [tree.nodes[c] for c in x.children if q <= set(tree.nodes[c].nodes)]
            assert len(kids) == 1
            x = kids[0]
        assert q <= set(x.nodes)
        assert x.separator is not None or len(q) == 1


def test_separator_paths_are_piece_shortest_paths():
    g = delaunay(500, seed=11)
    tree = build_decomposition(g)
    rng = np.random.default_rng(1)
    assert decomposition_violations(g, tree, sample_pairs=100, rng=rng) == []
    # the whole-graph distances never exceed the piece distances
    D = all_pairs(g)
    root_paths = tree.nodes[0].separator.paths
    for p in root_paths:
        for i in range(len(p.nodes)):
            assert D[p.nodes[0], p.nodes[i]] == pytest.approx(p.prefix_dist[i])
