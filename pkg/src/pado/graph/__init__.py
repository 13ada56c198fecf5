"""Embedded planar graphs: representation, validation, triangulation,
shortest paths, generators and text I/O."""

from pado.graph.embedding import (
    Diagnostics,
    EmbeddedPlanarGraph,
    connected_components,
    triangulate,
    validate,
)
from pado.graph.generate import delaunay, generate, grid, random_triangulation
from pado.graph.io import parse_graph, read_graph, serialize_graph, write_graph
from pado.graph.paths import ShortestPathTree, dijkstra, distances_from, sssp

__all__ = [
    "Diagnostics",
    "EmbeddedPlanarGraph",
    "ShortestPathTree",
    "connected_components",
    "delaunay",
    "dijkstra",
    "distances_from",
    "generate",
    "grid",
    "parse_graph",
    "random_triangulation",
    "read_graph",
    "serialize_graph",
    "sssp",
    "triangulate",
    "validate",
    "write_graph",
]
