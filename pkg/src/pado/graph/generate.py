"""Seeded instance generators: grids, Delaunay triangulations, stacked
random triangulations."""

from __future__ import annotations

import numpy as np

from pado.errors import InvalidParams
from pado.graph.embedding import EmbeddedPlanarGraph

KINDS = ("grid", "delaunay", "random-triangulation")
LENGTHS = ("default", "unit", "uniform")


def grid(rows: int, cols: int | None = None, lengths: str = "default", seed: int = 0) -> EmbeddedPlanarGraph:
    """``rows x cols`` grid; node ``r * cols + c`` sits at ``(c, r)``."""
    cols = rows if cols is None else cols
    if rows < 1 or cols < 1:
        raise InvalidParams("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    coords = [(c, r) for r in range(rows) for c in range(cols)]
    base = [1.0] * len(edges)
    return EmbeddedPlanarGraph(rows * cols, edges, _lengths(base, lengths, seed), coords=coords)


def delaunay(n: int, lengths: str = "default", seed: int = 0) -> EmbeddedPlanarGraph:
    """Delaunay triangulation of ``n`` uniform points in the unit square.

    Default lengths are Euclidean.
    """
    if n < 3:
        raise InvalidParams("delaunay needs at least 3 points")
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    tri = Delaunay(pts)
    pairs = set()
    for a, b, c in tri.simplices.tolist():
        for u, v in ((a, b), (b, c), (a, c)):
            pairs.add((min(u, v), max(u, v)))
    edges = sorted(pairs)
    e = np.asarray(edges)
    base = np.hypot(*(pts[e[:, 0]] - pts[e[:, 1]]).T).tolist()
    coords = [tuple(p) for p in pts.tolist()]
    return EmbeddedPlanarGraph(n, edges, _lengths(base, lengths, seed), coords=coords)


def random_triangulation(n: int, lengths: str = "default", seed: int = 0) -> EmbeddedPlanarGraph:
    """Stacked triangulation: repeatedly drop a node into a random inner face
    and join it to the face's three corners.  Default lengths are uniform on
    ``[1, 10)``.  No coordinates are kept, so files use rotation lists."""
    if n < 3:
        raise InvalidParams("random-triangulation needs at least 3 nodes")
    rng = np.random.default_rng(seed)
    edges = [(0, 1), (1, 2), (2, 0)]
    # rotation as ccw neighbour lists; the outer face is (0, 2, 1)
    rot = {0: [1, 2], 1: [2, 0], 2: [0, 1]}
    faces = [(0, 1, 2)]
    for v in range(3, n):
        k = int(rng.integers(len(faces)))
        a, b, c = faces[k]
        faces[k] = (a, b, v)
        faces.append((b, c, v))
        faces.append((c, a, v))
        edges.extend(((a, v), (b, v), (c, v)))
        # inside ccw triangle (a, b, c): insert v between the face's sides
        for x, left in ((a, b), (b, c), (c, a)):
            lst = rot[x]
            i = lst.index(left)
            lst.insert(i + 1, v)
        rot[v] = [a, b, c]
    index = {}
    for e, (u, w) in enumerate(edges):
        index[(u, w)] = 2 * e
        index[(w, u)] = 2 * e + 1
    rotation = [[index[(x, y)] for y in rot[x]] for x in range(n)]
    base = (1.0 + 9.0 * rng.random(len(edges))).tolist()
    return EmbeddedPlanarGraph(n, edges, _lengths(base, lengths, seed), rotation=rotation)


def generate(kind: str, sizes, seed: int = 0, lengths: str = "default") -> EmbeddedPlanarGraph:
    """Dispatch on ``kind``; ``sizes`` is ``(rows, cols)`` for grids else ``(n,)``."""
    sizes = [int(s) for s in sizes]
    if lengths not in LENGTHS:
        raise InvalidParams(f"unknown length distribution {lengths!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise InvalidParams("sizes must be positive")
    if kind == "grid":
        if len(sizes) > 2:
            raise InvalidParams("grid takes rows [cols]")
        return grid(sizes[0], sizes[-1], lengths=lengths, seed=seed)
    if len(sizes) != 1:
        raise InvalidParams(f"{kind} takes a single node count")
    if kind == "delaunay":
        return delaunay(sizes[0], lengths=lengths, seed=seed)
    if kind == "random-triangulation":
        return random_triangulation(sizes[0], lengths=lengths, seed=seed)
    raise InvalidParams(f"unknown graph kind {kind!r}")


def _lengths(base, mode, seed):
    if mode in ("default", None):
        return list(base)
    if mode == "unit":
        return [1.0] * len(base)
    if mode == "uniform":
        rng = np.random.default_rng([seed, 0x5EED])
        return (0.05 + rng.random(len(base))).tolist()
    raise InvalidParams(f"unknown length distribution {mode!r}")
