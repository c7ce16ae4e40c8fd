"""Capacity-parameterized envelope structures.

When every line in an evacuation family is given the same free slope
1/c, the family's upper envelope changes combinatorially only at a
finite, decreasing sequence of capacities: as c drops, adjacent
envelope pieces merge one at a time.  This module computes that
threshold sequence with a max-heap over adjacent-pair merge values,
then records the merge history in persistent segment trees built by
path copying, one version per capacity regime.

Version h of the owner tree answers "which line attains the capped
envelope at z" and version h of the integral tree answers "what is the
integral of the capped envelope from 0 to z", both in O(log m) for any
capacity c inside regime h.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .pathnet import PathNetwork, PrefixTables


@dataclass(frozen=True)
class MergeStep:
    """One envelope merge: boundary ``killed`` disappears at capacity
    ``threshold``; the interval it opened is absorbed by the line of
    boundary ``left``; ``right`` is the next surviving boundary (or the
    past-the-end sentinel), so the absorbed span is
    (W_{killed-1}, W_{right-1}]."""

    threshold: float
    killed: int
    left: int
    right: int


@dataclass
class CapacityThresholds:
    """Strictly decreasing (up to ties) capacities c_1 >= ... >= c_{m-1}
    at which the capped envelope loses one piece, plus the merge that
    happens at each."""

    thresholds: np.ndarray
    merges: list[MergeStep]
    _neg: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._neg = -np.asarray(self.thresholds)

    @property
    def regimes(self) -> int:
        return len(self.thresholds) + 1

    def regime_of(self, c: float) -> int:
        """h such that c lies in (c_h, c_{h-1}], 1-based; c_0 = inf."""
        if c <= 0:
            raise ValueError(f"capacity parameter must be positive, got {c}")
        return 1 + int(np.searchsorted(self._neg, -c, side="right"))

    def alive_boundaries(self, l: int, r: int, h: int) -> list[int]:
        """Surviving boundary indices at regime h (brute reconstruction)."""
        dead = {mg.killed for mg in self.merges[: h - 1]}
        return [j for j in range(l + 1, r + 1) if j not in dead]


def compute_capacity_thresholds(
    net: PathNetwork, tables: PrefixTables, l: int, r: int
) -> CapacityThresholds:
    """Run the merge process for the family of vertices [l+1..r].

    Adjacent pair (a, b) of surviving boundaries merges at capacity
    (W_{b-1} - W_{a-1}) / (tau * L_{a,b}); a max-heap with lazy
    invalidation yields the merges in decreasing capacity order.
    Ties pop in boundary order, which is harmless: zero-width capacity
    regimes are never selected by the regime search.
    """
    m = r - l
    if m < 2:
        return CapacityThresholds(thresholds=np.empty(0), merges=[])
    W = tables.W
    Lc = tables.Lcum
    tau = net.tau

    def merge_value(a: int, b: int) -> float:
        return (W[b - 1] - W[a - 1]) / (tau * (Lc[b - 1] - Lc[a - 1]))

    nxt = {j: j + 1 for j in range(l + 1, r + 1)}  # r+1 is the sentinel
    prv = {j: j - 1 for j in range(l + 2, r + 2)}
    heap: list[tuple[float, int, int]] = []
    for a in range(l + 1, r):
        heapq.heappush(heap, (-merge_value(a, a + 1), a, a + 1))

    thresholds = []
    merges = []
    while len(merges) < m - 1:
        negc, a, b = heapq.heappop(heap)
        if nxt.get(a) != b:
            continue  # stale pair
        e = nxt[b]
        thresholds.append(-negc)
        merges.append(MergeStep(threshold=-negc, killed=b, left=a, right=e))
        nxt[a] = e
        if e <= r:
            prv[e] = a
            heapq.heappush(heap, (-merge_value(a, e), a, e))
    return CapacityThresholds(thresholds=np.array(thresholds), merges=merges)


class _Node:
    __slots__ = ("lo", "hi", "left", "right", "payload")

    def __init__(self, lo, hi, left, right, payload):
        self.lo = lo
        self.hi = hi
        self.left = left
        self.right = right
        self.payload = payload


_ZERO = (0.0, 0.0, 0.0, 0.0)  # (A1, A0, B1, B0): (A1*z + A0)/c + B1*z + B0


@dataclass
class PersistentIntervalTree:
    """Owner and integral trees over leaves l+1..r, one root per regime.

    Path copying shares all untouched structure between versions;
    ``owner_roots[h-1]`` / ``integral_roots[h-1]`` answer regime-h
    queries as if the regime's tree had been built from scratch.
    """

    l: int
    r: int
    Wm1: np.ndarray   # Wm1[j-(l+1)] = W_{j-1}
    tL: np.ndarray    # tL[j-(l+1)] = tau * L_{l, j}
    total_weight: float
    owner_roots: list[_Node]
    integral_roots: list[_Node]
    nodes_created: int
    tail_a2: float = 0.5  # quadratic tail coefficient at leaves

    @property
    def m(self) -> int:
        return self.r - self.l

    def _wm1(self, j: int) -> float:
        return float(self.Wm1[j - (self.l + 1)])

    def _tl(self, j: int) -> float:
        return float(self.tL[j - (self.l + 1)])

    def line_value(self, j: int, c: float, z: float) -> float:
        w = self._wm1(j)
        if z <= w:
            return 0.0
        return (z - w) / c + self._tl(j)

    def _leaf_of(self, z: float) -> int:
        """Boundary j with z in (W_{j-1}, W_j]; clamps into [l+1, r]."""
        idx = int(np.searchsorted(self.Wm1, z, side="left"))
        return min(max(self.l + idx, self.l + 1), self.r)

    def owner_at(self, h: int, z: float) -> int:
        node = self.owner_roots[h - 1]
        j = self._leaf_of(z)
        while node.payload is None:
            node = node.left if j <= (node.lo + node.hi) // 2 else node.right
        return node.payload

    def integral_at(self, h: int, c: float, z: float) -> float:
        node = self.integral_roots[h - 1]
        j = self._leaf_of(z)
        a1 = a0 = b1 = b0 = 0.0
        a2 = 0.0
        while True:
            p = node.payload
            a1 += p[0]
            a0 += p[1]
            b1 += p[2]
            b0 += p[3]
            if node.lo == node.hi:
                a2 = self.tail_a2
                break
            node = node.left if j <= (node.lo + node.hi) // 2 else node.right
        return (a2 * z * z + a1 * z + a0) / c + b1 * z + b0


def _build_leaf_payloads(
    net: PathNetwork, tables: PrefixTables, l: int, r: int
) -> tuple[np.ndarray, np.ndarray, list[tuple]]:
    js = np.arange(l + 1, r + 1)
    Wm1 = tables.W[js - 1].astype(np.float64)
    tL = net.tau * (tables.Lcum[js] - tables.Lcum[l])
    w = tables.W[js] - tables.W[js - 1]
    # full integral of piece q over (W_{q-1}, W_q]: (w_q^2/2)/c + tL_q*w_q
    prefA = np.concatenate(([0.0], np.cumsum(w * w / 2.0)))[:-1]
    prefB = np.concatenate(([0.0], np.cumsum(tL * w)))[:-1]
    payloads = []
    for k in range(len(js)):
        # tail (z-W_{j-1})^2/(2c) + tL_j (z-W_{j-1}) plus completed pieces;
        # the z^2/(2c) term is implicit at every leaf (tail_a2)
        a1 = -Wm1[k]
        a0 = Wm1[k] * Wm1[k] / 2.0 + prefA[k]
        b1 = tL[k]
        b0 = -tL[k] * Wm1[k] + prefB[k]
        payloads.append((a1, a0, b1, b0))
    return Wm1, tL, payloads


def build_persistent_trees(
    net: PathNetwork,
    tables: PrefixTables,
    l: int,
    r: int,
    thresholds: CapacityThresholds,
) -> PersistentIntervalTree:
    """Build regime-1 trees, then replay the merges with path copying."""
    if r - l < 1:
        raise ValueError("family needs at least one line (one edge)")
    Wm1, tL, leaf_payloads = _build_leaf_payloads(net, tables, l, r)
    counter = [0]

    def make(lo: int, hi: int, owner_leaf) -> _Node:
        counter[0] += 1
        if lo == hi:
            return _Node(lo, hi, None, None, owner_leaf(lo))
        mid = (lo + hi) // 2
        return _Node(lo, hi, make(lo, mid, owner_leaf), make(mid + 1, hi, owner_leaf), None)

    owner_root = make(l + 1, r, lambda j: j)
    counter_int = [0]

    def make_int(lo: int, hi: int) -> _Node:
        counter_int[0] += 1
        if lo == hi:
            return _Node(lo, hi, None, None, leaf_payloads[lo - (l + 1)])
        mid = (lo + hi) // 2
        return _Node(lo, hi, make_int(lo, mid), make_int(mid + 1, hi), _ZERO)

    integral_root = make_int(l + 1, r)

    def assign(node: _Node, a: int, b: int, owner: int) -> _Node:
        counter[0] += 1
        if a <= node.lo and node.hi <= b:
            return _Node(node.lo, node.hi, node.left, node.right, owner)
        mid = (node.lo + node.hi) // 2
        left, right = node.left, node.right
        if a <= mid:
            left = assign(left, a, b, owner)
        if b > mid:
            right = assign(right, a, b, owner)
        return _Node(node.lo, node.hi, left, right, node.payload)

    def add(node: _Node, a: int, b: int, delta: tuple) -> _Node:
        counter_int[0] += 1
        if a <= node.lo and node.hi <= b:
            p = node.payload
            merged = (p[0] + delta[0], p[1] + delta[1], p[2] + delta[2], p[3] + delta[3])
            return _Node(node.lo, node.hi, node.left, node.right, merged)
        mid = (node.lo + node.hi) // 2
        left, right = node.left, node.right
        if a <= mid:
            left = add(left, a, b, delta)
        if b > mid:
            right = add(right, a, b, delta)
        return _Node(node.lo, node.hi, left, right, node.payload)

    owner_roots = [owner_root]
    integral_roots = [integral_root]
    W = tables.W
    wend = float(W[r])
    for mg in thresholds.merges:
        a, b, e = mg.left, mg.killed, mg.right
        owner_roots.append(assign(owner_roots[-1], a, min(e - 1, r), a))
        wa, wb = float(W[a - 1]), float(W[b - 1])
        we = float(W[e - 1])
        dl = float(tL[a - (l + 1)] - tL[b - (l + 1)])  # negative: -tau*L_{a,b}
        # line_a - line_b is constant in z: (wb - wa)/c + dl
        tail = (wb - wa, -wb * (wb - wa), dl, -wb * dl)
        root = add(integral_roots[-1], b, min(e - 1, r), tail)
        if e <= r:
            const = ((we - wb) * (wb - wa), (we - wb) * dl)
            root = add(root, e, r, (0.0, const[0], 0.0, const[1]))
        integral_roots.append(root)

    return PersistentIntervalTree(
        l=l, r=r, Wm1=Wm1, tL=tL, total_weight=wend,
        owner_roots=owner_roots, integral_roots=integral_roots,
        nodes_created=counter[0] + counter_int[0],
    )


def bar_envelope_owner(
    tree: PersistentIntervalTree, thresholds: CapacityThresholds, c: float, z: float
) -> int:
    """Index of the line attaining the capped envelope at z, or -1 on
    the leading zero region.  Queries beyond W_r extrapolate along the
    last surviving line."""
    h = thresholds.regime_of(c)
    if z <= tree.Wm1[0]:
        return -1
    return tree.owner_at(h, min(z, float(tree.total_weight)))


def bar_envelope_value(
    tree: PersistentIntervalTree, thresholds: CapacityThresholds, c: float, z: float
) -> float:
    j = bar_envelope_owner(tree, thresholds, c, z)
    if j < 0:
        return 0.0
    return tree.line_value(j, c, z)


def bar_envelope_integral(
    tree: PersistentIntervalTree, thresholds: CapacityThresholds, c: float, z: float
) -> float:
    """Integral from 0 to z of the capped envelope at capacity c."""
    h = thresholds.regime_of(c)
    lo = float(tree.Wm1[0])
    if z <= lo:
        return 0.0
    wend = tree.total_weight
    if z <= wend:
        return tree.integral_at(h, c, z)
    base = tree.integral_at(h, c, wend)
    edge = tree.line_value(tree.owner_at(h, wend), c, wend)
    dz = z - wend
    return base + edge * dz + dz * dz / (2.0 * c)
