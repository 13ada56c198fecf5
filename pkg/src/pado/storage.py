"""Binary oracle files.

Layout (little endian; ``u32`` unsigned 32-bit, ``i32`` signed, ``f64``
IEEE double)::

    magic      4 bytes  b"PADO"
    version    u16
    params     f64 epsilon, f64 c_ell, u32 ell, u64 r, u32 n
    regions    u32 count, then per region:
                 u32 m, u32[m] u, u32[m] v, f64[m] length,
                 u32 k, u32[k] boundary nodes
    home       u32[n]
    decomp     u32 count, then per tree node:
                 i32 parent, u32 depth, i32 nontree_u, i32 nontree_v,
                 u8 path count, then per path: u32 len, u32[len] nodes,
                 f64[len] prefix
    leafmost   i32[n]
    store      u32 boundary count, then per boundary node (ascending):
                 u32 node, u32 key count, then per key (ascending):
                 u32 x, u8 sel, u32 len, u32[len] index, f64[len] dist
    crc32      u32 over every preceding byte
"""

from __future__ import annotations

import io
import struct
import zlib
from pathlib import Path

import numpy as np

from pado.connections import Connection
from pado.decomposition import DecompNode, DecompositionTree, Separator, SeparatorPath
from pado.errors import CorruptFile, VersionMismatch
from pado.oracle import DistanceOracle, OracleParams

MAGIC = b"PADO"
VERSION = 1


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt, *vals):
        self.buf.write(struct.pack("<" + fmt, *vals))

    def array(self, values, dtype):
        self.buf.write(np.asarray(values, dtype=dtype).astype(dtype, copy=False).tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, k):
        if k < 0 or self.pos + k > len(self.data):
            raise CorruptFile("oracle file is truncated")
        out = self.data[self.pos : self.pos + k]
        self.pos += k
        return out

    def unpack(self, fmt):
        fmt = "<" + fmt
        vals = struct.unpack(fmt, self.take(struct.calcsize(fmt)))
        return vals if len(vals) > 1 else vals[0]

    def array(self, k, dtype):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(k * dt.itemsize), dtype=dt)


def to_bytes(oracle: DistanceOracle) -> bytes:
    """Serialise ``oracle``; identical oracles give identical bytes."""
    w = _Writer()
    w.buf.write(MAGIC)
    w.pack("H", VERSION)
    p = oracle.params
    w.pack("ddIQI", p.epsilon, p.c_ell, p.ell, p.r, oracle.n)
    w.pack("I", len(oracle.region_edges))
    for (u, v, x), b in zip(oracle.region_edges, oracle.region_boundary):
        w.pack("I", len(u))
        w.array(u, "<u4")
        w.array(v, "<u4")
        w.array(x, "<f8")
        w.pack("I", len(b))
        w.array(b, "<u4")
    w.array(oracle.home_region, "<u4")
    tree = oracle.decomposition
    w.pack("I", len(tree.nodes))
    for node in tree.nodes:
        sep = node.separator
        nt = sep.nontree if sep is not None and sep.nontree is not None else (-1, -1)
        paths = sep.paths if sep is not None else ()
        w.pack("iIiiB", node.parent, node.depth, nt[0], nt[1], len(paths))
        for path in paths:
            w.pack("I", len(path.nodes))
            w.array(path.nodes, "<u4")
            w.array(path.prefix_dist, "<f8")
    w.array(tree.leafmost, "<i4")
    w.pack("I", len(oracle.store))
    for b in sorted(oracle.store):
        entry = oracle.store[b]
        w.pack("II", b, len(entry))
        for (x, sel) in sorted(entry):
            conns = entry[(x, sel)]
            w.pack("IBI", x, sel, len(conns))
            w.array([c.path_index for c in conns], "<u4")
            w.array([c.dist for c in conns], "<f8")
    body = w.buf.getvalue()
    return body + struct.pack("<I", zlib.crc32(body))


def from_bytes(data: bytes) -> DistanceOracle:
    """Inverse of :func:`to_bytes`.

    Raises
    ------
    CorruptFile
        Bad magic, failed checksum, truncation or inconsistent content.
    VersionMismatch
        The file was written by another format version.
    """
    if len(data) < 6 or data[:4] != MAGIC:
        raise CorruptFile("not an oracle file (bad magic)")
    version = struct.unpack("<H", data[4:6])[0]
    if version != VERSION:
        raise VersionMismatch(f"oracle file version {version}, expected {VERSION}")
    if len(data) < 10:
        raise CorruptFile("oracle file is truncated")
    body, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(body) != crc:
        raise CorruptFile("checksum mismatch")
    try:
        return _parse(_Reader(body))
    except CorruptFile:
        raise
    except (ValueError, IndexError, KeyError, struct.error) as exc:
        raise CorruptFile(f"inconsistent oracle file: {exc}") from exc


def _parse(r: _Reader) -> DistanceOracle:
    r.take(6)
    eps, c_ell, ell, rr, n = r.unpack("ddIQI")
    params = OracleParams(eps, c_ell, ell, rr)
    region_edges, region_boundary = [], []
    for _ in range(r.unpack("I")):
        m = r.unpack("I")
        u = r.array(m, "<u4").astype(np.int64)
        v = r.array(m, "<u4").astype(np.int64)
        x = r.array(m, "<f8").astype(float)
        k = r.unpack("I")
        region_edges.append((u, v, x))
        region_boundary.append(r.array(k, "<u4").astype(np.int64))
    home = r.array(n, "<u4").astype(np.int64)
    count = r.unpack("I")
    raw = []
    for i in range(count):
        parent, depth, a, b, k = r.unpack("iIiiB")
        paths = []
        for _ in range(k):
            m = r.unpack("I")
            nodes = tuple(r.array(m, "<u4").tolist())
            prefix = tuple(r.array(m, "<f8").tolist())
            paths.append(SeparatorPath(nodes, prefix))
        sep = Separator(tuple(paths), None if a < 0 else (a, b)) if paths else None
        raw.append((parent, depth, sep))
    children = [[] for _ in raw]
    for i, (parent, _, _) in enumerate(raw):
        if parent >= 0:
            if parent >= len(raw):
                raise CorruptFile("decomposition parent out of range")
            children[parent].append(i)
    nodes = tuple(
        DecompNode(i, (), sep, tuple(children[i]), depth, parent) for i, (parent, depth, sep) in enumerate(raw)
    )
    leafmost = tuple(r.array(n, "<i4").tolist())
    store = {}
    for _ in range(r.unpack("I")):
        b, keys = r.unpack("II")
        entry = {}
        for _ in range(keys):
            x, sel, m = r.unpack("IBI")
            idx = r.array(m, "<u4").tolist()
            dist = r.array(m, "<f8").tolist()
            entry[(x, sel)] = tuple(Connection(i, d) for i, d in zip(idx, dist))
        store[b] = entry
    if r.pos != len(r.data):
        raise CorruptFile("trailing bytes after the connection store")
    tree = DecompositionTree(nodes=nodes, leafmost=leafmost)
    return DistanceOracle(n, params, region_edges, region_boundary, home, tree, store)


def save(oracle: DistanceOracle, path) -> int:
    """Write ``oracle`` to ``path``; returns the byte count."""
    data = to_bytes(oracle)
    Path(path).write_bytes(data)
    return len(data)


def load(path) -> DistanceOracle:
    """Read an oracle file (see :func:`from_bytes` for errors)."""
    return from_bytes(Path(path).read_bytes())
