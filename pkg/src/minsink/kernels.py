"""Closed-form evacuation-time primitives.

The time for the first z units of supply (in cumulative-weight
coordinates) to finish arriving at a sink vertex is the max of simple
one-kink line functions, one per candidate bottleneck vertex.  These
evaluators are the hot path of the brute-force reference and the
ground truth for every envelope structure built on top of them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .pathnet import PathNetwork, PrefixTables

Direction = Literal["rightward", "leftward"]


@dataclass(frozen=True)
class ThetaLine:
    """One evacuation line: zero up to ``threshold``, then affine.

    Rightward lines evaluate to ``slope*(z-threshold)+offset`` for
    z > threshold; leftward lines mirror (zero for z >= threshold,
    ``slope*(threshold-z)+offset`` below).  ``owner`` is the vertex
    index the line belongs to.
    """

    slope: float
    threshold: float
    offset: float
    direction: Direction = "rightward"
    owner: int = -1

    def __call__(self, z: float) -> float:
        if self.direction == "rightward":
            if z <= self.threshold:
                return 0.0
            return self.slope * (z - self.threshold) + self.offset
        if z >= self.threshold:
            return 0.0
        return self.slope * (self.threshold - z) + self.offset


def plus_line(net: PathNetwork, tables: PrefixTables, i: int, j: int) -> ThetaLine:
    """The line for supply beyond W_{j-1} travelling from j down to sink i."""
    if not 1 <= i < j <= tables.n:
        raise IndexError(f"need 1 <= i < j <= {tables.n}, got ({i}, {j})")
    return ThetaLine(
        slope=1.0 / tables.min_capacity(i, j),
        threshold=tables.weight_prefix(j - 1),
        offset=net.tau * tables.distance(i, j),
        direction="rightward",
        owner=j,
    )


def minus_line(net: PathNetwork, tables: PrefixTables, i: int, j: int) -> ThetaLine:
    """The leftward mirror of :func:`plus_line` for sink i, source j < i."""
    if not 1 <= j < i <= tables.n:
        raise IndexError(f"need 1 <= j < i <= {tables.n}, got ({i}, {j})")
    return ThetaLine(
        slope=1.0 / tables.min_capacity(j, i),
        threshold=tables.weight_prefix(j),
        offset=net.tau * tables.distance(j, i),
        direction="leftward",
        owner=j,
    )


def theta_plus_line(net: PathNetwork, tables: PrefixTables, i: int, j: int, z: float) -> float:
    """Time at which the first z-W_i of right-side supply clears the
    bottleneck toward sink i, counting only vertex j's cut."""
    return plus_line(net, tables, i, j)(z)


def theta_minus_line(net: PathNetwork, tables: PrefixTables, i: int, j: int, z: float) -> float:
    """Mirror of :func:`theta_plus_line` for left-side supply."""
    return minus_line(net, tables, i, j)(z)


def bar_theta_plus_line(
    net: PathNetwork, tables: PrefixTables, i: int, j: int, c: float, z: float
) -> float:
    """:func:`theta_plus_line` with the bottleneck capacity replaced by c."""
    if c <= 0:
        raise ValueError(f"capacity parameter must be positive, got {c}")
    if not 1 <= i < j <= tables.n:
        raise IndexError(f"need 1 <= i < j <= {tables.n}, got ({i}, {j})")
    w = tables.weight_prefix(j - 1)
    if z <= w:
        return 0.0
    return (z - w) / c + net.tau * tables.distance(i, j)


def bar_theta_minus_line(
    net: PathNetwork, tables: PrefixTables, i: int, j: int, c: float, z: float
) -> float:
    """:func:`theta_minus_line` with the bottleneck capacity replaced by c."""
    if c <= 0:
        raise ValueError(f"capacity parameter must be positive, got {c}")
    if not 1 <= j < i <= tables.n:
        raise IndexError(f"need 1 <= j < i <= {tables.n}, got ({i}, {j})")
    w = tables.weight_prefix(j)
    if z >= w:
        return 0.0
    return (w - z) / c + net.tau * tables.distance(j, i)


def completion_time_right(net: PathNetwork, tables: PrefixTables, i: int) -> float:
    """Time for all supply right of vertex i to finish evacuating to i."""
    n = tables.n
    if not 1 <= i <= n:
        raise IndexError(f"vertex index {i} out of range [1..{n}]")
    total = tables.total_weight
    best = 0.0
    for j in range(i + 1, n + 1):
        t = theta_plus_line(net, tables, i, j, total)
        if t > best:
            best = t
    return best


def completion_time_left(net: PathNetwork, tables: PrefixTables, i: int) -> float:
    """Time for all supply left of vertex i to finish evacuating to i."""
    n = tables.n
    if not 1 <= i <= n:
        raise IndexError(f"vertex index {i} out of range [1..{n}]")
    best = 0.0
    for j in range(1, i):
        t = theta_minus_line(net, tables, i, j, 0.0)
        if t > best:
            best = t
    return best
