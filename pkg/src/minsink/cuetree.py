"""Segment tree over vertex indices with per-node query payloads.

Each node spanning vertices [l..r] carries, for both travel
directions, the upper envelope of its evacuation family (with prefix
integrals) and the capacity-parameterized persistent structures.  The
leftward direction is not implemented separately: a node's minus-side
payload is the plus-side payload of the mirrored span on the reversed
network, and query code reflects coordinates (z -> W_n - z).

Any range of vertices decomposes into O(log n) maximal nodes, visited
left to right.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import capseg, envelope, kernels, pathnet
from .capseg import CapacityThresholds, MergeStep, PersistentIntervalTree
from .envelope import Envelope
from .pathnet import PathNetwork, PrefixTables


@dataclass
class DirectionalPayload:
    """One direction's structures for a node, in that direction's frame."""

    env: Envelope | None = None
    thresholds: CapacityThresholds | None = None
    ptree: PersistentIntervalTree | None = None


@dataclass
class CueNode:
    l: int
    r: int
    left: "CueNode | None" = None
    right: "CueNode | None" = None
    plus: DirectionalPayload = field(default_factory=DirectionalPayload)
    minus: DirectionalPayload = field(default_factory=DirectionalPayload)

    @property
    def m(self) -> int:
        return self.r - self.l

    @property
    def is_leaf(self) -> bool:
        return self.l == self.r


@dataclass
class CueTree:
    net: PathNetwork
    tables: PrefixTables
    mnet: PathNetwork
    mtables: PrefixTables
    root: CueNode
    uniform: bool

    @property
    def n(self) -> int:
        return self.tables.n

    def mirror_vertex(self, i: int) -> int:
        return self.n + 1 - i

    def iter_nodes(self) -> Iterator[CueNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.right is not None:
                stack.append(node.right)
            if node.left is not None:
                stack.append(node.left)


def _build_payload(
    net: PathNetwork, tables: PrefixTables, l: int, r: int, uniform: bool
) -> DirectionalPayload:
    """Envelope + capacity structures for the family of vertices [l+1..r]."""
    lines = [kernels.plus_line(net, tables, l, h) for h in range(l + 1, r + 1)]
    env = envelope.build_upper_envelope(lines, z_max=tables.total_weight)
    env.uniform = uniform
    thr = capseg.compute_capacity_thresholds(net, tables, l, r)
    ptree = capseg.build_persistent_trees(net, tables, l, r, thr)
    return DirectionalPayload(env=env, thresholds=thr, ptree=ptree)


def build_cue_tree(net: PathNetwork, tables: PrefixTables | None = None) -> CueTree:
    """Build the tree with midpoint splits and all node payloads."""
    if tables is None:
        tables = pathnet.build_tables(net)
    mnet = pathnet.mirrored(net)
    mtables = pathnet.build_tables(mnet)
    n = tables.n
    uniform = pathnet.is_uniform(net)

    def build(l: int, r: int) -> CueNode:
        node = CueNode(l=l, r=r)
        if l < r:
            mid = (l + r) // 2
            node.left = build(l, mid)
            node.right = build(mid + 1, r)
            node.plus = _build_payload(net, tables, l, r, uniform)
            # mirrored span [n+1-r .. n+1-l] on the reversed network
            node.minus = _build_payload(mnet, mtables, n + 1 - r, n + 1 - l, uniform)
        return node

    return CueTree(
        net=net, tables=tables, mnet=mnet, mtables=mtables,
        root=build(1, n), uniform=uniform,
    )


def maximal_subpath_nodes(tree: CueTree, i: int, j: int) -> list[CueNode]:
    """The canonical disjoint cover of vertices [i..j], left to right."""
    if i > j:
        return []
    if not (1 <= i and j <= tree.n):
        raise IndexError(f"range [{i}..{j}] outside [1..{tree.n}]")
    out: list[CueNode] = []

    def walk(node: CueNode, a: int, b: int) -> None:
        if a <= node.l and node.r <= b:
            out.append(node)
            return
        assert node.left is not None and node.right is not None
        if a <= node.left.r:
            walk(node.left, a, min(b, node.left.r))
        if b >= node.right.l:
            walk(node.right, max(a, node.right.l), b)

    walk(tree.root, i, j)
    return out


# --- binary cache file -------------------------------------------------
#
# Layout (all little-endian): magic, version, instance arrays, then for
# every payload in deterministic traversal order the envelope arrays
# and the merge history.  Persistent trees are reconstructed by
# replaying the stored merges, which yields node-for-node identical
# query behaviour without pointer serialization.

_MAGIC = b"MSNK"
_VERSION = 2


def _pack_array(buf: list[bytes], arr: np.ndarray) -> None:
    raw = np.ascontiguousarray(arr)
    code = {"f8": b"d", "i8": b"q"}[raw.dtype.str[-2:]]
    buf.append(struct.pack("<cQ", code, raw.size))
    buf.append(raw.astype("<" + raw.dtype.str[-2:]).tobytes())


def _unpack_array(view: memoryview, pos: int) -> tuple[np.ndarray, int]:
    code, size = struct.unpack_from("<cQ", view, pos)
    pos += struct.calcsize("<cQ")
    dtype = {b"d": "<f8", b"q": "<i8"}[code]
    arr = np.frombuffer(view, dtype=dtype, count=size, offset=pos).copy()
    return arr, pos + arr.nbytes


def _pack_payload(buf: list[bytes], p: DirectionalPayload) -> None:
    env = p.env
    assert env is not None and p.thresholds is not None
    for arr in (env.breaks, env.values, env.piece_slope, env.piece_thr, env.piece_off,
                env.prefix_integrals):
        _pack_array(buf, arr.astype(np.float64))
    _pack_array(buf, env.owners.astype(np.int64))
    _pack_array(buf, np.asarray(p.thresholds.thresholds, dtype=np.float64))
    mg = p.thresholds.merges
    _pack_array(buf, np.array([s.threshold for s in mg], dtype=np.float64))
    _pack_array(buf, np.array([[s.killed, s.left, s.right] for s in mg],
                              dtype=np.int64).reshape(-1))


def _unpack_payload(
    view: memoryview, pos: int, net: PathNetwork, tables: PrefixTables,
    l: int, r: int, uniform: bool,
) -> tuple[DirectionalPayload, int]:
    arrs = []
    for _ in range(6):
        a, pos = _unpack_array(view, pos)
        arrs.append(a)
    owners, pos = _unpack_array(view, pos)
    env = Envelope(
        breaks=arrs[0], values=arrs[1], owners=owners.astype(np.int64),
        piece_slope=arrs[2], piece_thr=arrs[3], piece_off=arrs[4],
        prefix_integrals=arrs[5], uniform=uniform,
    )
    thr_vals, pos = _unpack_array(view, pos)
    mthr, pos = _unpack_array(view, pos)
    midx, pos = _unpack_array(view, pos)
    midx = midx.astype(np.int64).reshape(-1, 3)
    merges = [
        MergeStep(threshold=float(t), killed=int(k), left=int(a), right=int(b))
        for t, (k, a, b) in zip(mthr, midx)
    ]
    thr = CapacityThresholds(thresholds=thr_vals, merges=merges)
    ptree = capseg.build_persistent_trees(net, tables, l, r, thr)
    return DirectionalPayload(env=env, thresholds=thr, ptree=ptree), pos


def save_cache(tree: CueTree, path) -> None:
    """Serialize the built tree (versioned little-endian binary)."""
    buf: list[bytes] = [struct.pack("<4sIQ", _MAGIC, _VERSION, tree.n)]
    buf.append(struct.pack("<dB", tree.net.tau, 1 if tree.uniform else 0))
    _pack_array(buf, tree.net.weights)
    _pack_array(buf, tree.net.lengths)
    _pack_array(buf, tree.net.capacities)
    for node in tree.iter_nodes():
        if node.is_leaf:
            continue
        _pack_payload(buf, node.plus)
        _pack_payload(buf, node.minus)
    with open(path, "wb") as f:
        f.write(b"".join(buf))


def load_cache(path) -> CueTree:
    with open(path, "rb") as f:
        view = memoryview(f.read())
    magic, version, n = struct.unpack_from("<4sIQ", view, 0)
    if magic != _MAGIC:
        raise ValueError("not a cue-tree cache file")
    if version != _VERSION:
        raise ValueError(f"unsupported cache version {version}")
    pos = struct.calcsize("<4sIQ")
    tau, uniform_flag = struct.unpack_from("<dB", view, pos)
    pos += struct.calcsize("<dB")
    weights, pos = _unpack_array(view, pos)
    lengths, pos = _unpack_array(view, pos)
    capacities, pos = _unpack_array(view, pos)
    net = PathNetwork(weights=weights, lengths=lengths, capacities=capacities, tau=tau)
    tables = pathnet.build_tables(net)
    mnet = pathnet.mirrored(net)
    mtables = pathnet.build_tables(mnet)
    uniform = bool(uniform_flag)

    def build(l: int, r: int) -> CueNode:
        nonlocal pos
        node = CueNode(l=l, r=r)
        if l < r:
            mid = (l + r) // 2
            # traversal order must match iter_nodes: node before children
            node.plus, pos = _unpack_payload(view, pos, net, tables, l, r, uniform)
            node.minus, pos = _unpack_payload(
                view, pos, mnet, mtables, n + 1 - r, n + 1 - l, uniform)
            node.left = build(l, mid)
            node.right = build(mid + 1, r)
        return node

    root = build(1, int(n))
    return CueTree(net=net, tables=tables, mnet=mnet, mtables=mtables,
                   root=root, uniform=uniform)
