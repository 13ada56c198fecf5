"""Shared fixtures and independent reference implementations."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.sparse.csgraph import dijkstra as cs_dijkstra

from pado.connections import graph_csr
from pado.graph import delaunay, grid, random_triangulation

settings.register_profile(
    "pado", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("pado")


def bellman_ford(n, edges, lengths, source):
    """Textbook Bellman-Ford over an undirected edge list."""
    dist = [math.inf] * n
    dist[source] = 0.0
    for _ in range(n):
        changed = False
        for (u, v), w in zip(edges, lengths):
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
        if not changed:
            break
    return dist


def graph_edges(graph):
    return list(zip(graph.edge_u, graph.edge_v)), list(graph.length)


def all_pairs(graph):
    """Dense exact distance matrix (scipy Dijkstra)."""
    return cs_dijkstra(graph_csr(graph), directed=False)


def instances(max_n=300):
    """Small instances from every generator family and length model."""
    out = [
        ("grid6", grid(6)),
        ("grid8-uniform", grid(8, lengths="uniform", seed=3)),
        ("grid5x9", grid(5, 9)),
        ("delaunay60", delaunay(60, seed=1)),
        ("delaunay150-unit", delaunay(150, lengths="unit", seed=2)),
        ("tri80", random_triangulation(80, seed=4)),
        ("tri200-uniform", random_triangulation(200, lengths="uniform", seed=5)),
        ("delaunay300", delaunay(300, seed=6)),
    ]
    return [(name, g) for name, g in out if g.n <= max_n]


@pytest.fixture(scope="session")
def small_instances():
    return instances()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
