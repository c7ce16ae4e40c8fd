"""Path network instances and O(1)-query preprocessing.

A path network is a chain of n vertices carrying supply, joined by n-1
edges with lengths and flow-rate capacities.  All queries downstream
(prefix weights, distances, bottleneck capacities) are answered from
the tables built here.

Vertex and edge indices are 1-based throughout the public API: vertex
``i`` ranges over ``[1..n]`` and edge ``i`` joins vertices ``i`` and
``i+1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class InvalidNetworkError(ValueError):
    """Raised when instance data violates the model invariants."""


@dataclass(frozen=True)
class PathNetwork:
    """A dynamic flow path network: weights, edge lengths/capacities, tau.

    ``tau`` is the time a unit of supply takes to traverse a unit of
    distance once it is moving.
    """

    weights: np.ndarray
    lengths: np.ndarray
    capacities: np.ndarray
    tau: float
    uniform_capacity: float | None = None

    @property
    def n(self) -> int:
        return len(self.weights)

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "lengths", np.asarray(self.lengths, dtype=np.float64))
        object.__setattr__(self, "capacities", np.asarray(self.capacities, dtype=np.float64))
        _validate(self)


def _validate(net: PathNetwork) -> None:
    n = net.n
    if n < 1:
        raise InvalidNetworkError("network needs at least one vertex")
    if net.lengths.shape != (n - 1,) or net.capacities.shape != (n - 1,):
        raise InvalidNetworkError(
            f"expected {n - 1} lengths and capacities for {n} vertices, "
            f"got {len(net.lengths)} and {len(net.capacities)}"
        )
    if not (net.weights > 0).all():
        raise InvalidNetworkError("vertex weights must be strictly positive")
    if n > 1 and not (net.lengths > 0).all():
        raise InvalidNetworkError("edge lengths must be strictly positive")
    if n > 1 and not (net.capacities > 0).all():
        raise InvalidNetworkError("edge capacities must be strictly positive")
    if not net.tau > 0:
        raise InvalidNetworkError("tau must be strictly positive")


@dataclass
class PrefixTables:
    """Prefix sums and a sparse-table RMQ over edge capacities.

    ``W[i]`` is the cumulative weight of vertices 1..i and ``Lcum[i]``
    the distance from vertex 1 to vertex i, both with a leading zero so
    that 1-based vertex indices address them directly.
    """

    net: PathNetwork
    W: np.ndarray
    Lcum: np.ndarray
    _sparse: np.ndarray = field(repr=False)
    _log2: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def total_weight(self) -> float:
        return float(self.W[self.n])

    def weight_prefix(self, i: int) -> float:
        """W_i, the total supply at vertices 1..i (W_0 = 0)."""
        return float(self.W[i])

    def distance(self, i: int, j: int) -> float:
        """L_{i,j}, the distance between vertices i and j (i <= j)."""
        return float(self.Lcum[j] - self.Lcum[i])

    def min_capacity(self, i: int, j: int) -> float:
        """C_{i,j}, the bottleneck capacity on the subpath from i to j."""
        if not 1 <= i < j <= self.n:
            raise IndexError(f"need 1 <= i < j <= {self.n}, got ({i}, {j})")
        lo, hi = i - 1, j - 1  # edge indices [lo, hi) in 0-based storage
        k = int(self._log2[hi - lo])
        return float(min(self._sparse[k, lo], self._sparse[k, hi - (1 << k)]))


def build_tables(net: PathNetwork) -> PrefixTables:
    """Precompute prefix sums and the capacity RMQ for O(1) queries."""
    n = net.n
    W = np.zeros(n + 1)
    np.cumsum(net.weights, out=W[1:])
    Lcum = np.zeros(n + 1)
    if n > 1:
        np.cumsum(net.lengths, out=Lcum[2:])

    m = n - 1
    levels = max(1, m.bit_length())
    sparse = np.full((levels, max(m, 1)), np.inf)
    if m > 0:
        sparse[0, :m] = net.capacities
        for k in range(1, levels):
            span = 1 << k
            prev = sparse[k - 1]
            sparse[k, : m - span + 1] = np.minimum(
                prev[: m - span + 1], prev[span // 2 : m - span // 2 + 1]
            )
    log2 = np.zeros(m + 1, dtype=np.int64)
    for v in range(2, m + 1):
        log2[v] = log2[v // 2] + 1
    return PrefixTables(net=net, W=W, Lcum=Lcum, _sparse=sparse, _log2=log2)


def min_capacity(tables: PrefixTables, i: int, j: int) -> float:
    """C_{i,j} as a free function, mirroring the method on the tables."""
    return tables.min_capacity(i, j)


def mirrored(net: PathNetwork) -> PathNetwork:
    """The same path traversed right-to-left.

    Vertex i maps to n+1-i; leftward evacuation on the original network
    is rightward evacuation on the mirror, which lets all directional
    machinery be written once.
    """
    return PathNetwork(
        weights=net.weights[::-1].copy(),
        lengths=net.lengths[::-1].copy(),
        capacities=net.capacities[::-1].copy(),
        tau=net.tau,
        uniform_capacity=net.uniform_capacity,
    )


def load_instance(path: str | Path) -> PathNetwork:
    """Read an instance from its JSON file format."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return instance_from_dict(data)


def instance_from_dict(data: dict) -> PathNetwork:
    try:
        tau = float(data["tau"])
        weights = data["weights"]
        lengths = data.get("lengths", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidNetworkError(f"malformed instance: {exc}") from exc
    n = len(weights)
    if "uniform_capacity" in data:
        uc = float(data["uniform_capacity"])
        capacities = [uc] * max(n - 1, 0)
    elif "capacities" in data:
        uc = None
        capacities = data["capacities"]
    else:
        raise InvalidNetworkError("instance needs 'capacities' or 'uniform_capacity'")
    return PathNetwork(
        weights=np.asarray(weights, dtype=np.float64),
        lengths=np.asarray(lengths, dtype=np.float64),
        capacities=np.asarray(capacities, dtype=np.float64),
        tau=tau,
        uniform_capacity=uc,
    )


def save_instance(net: PathNetwork, path: str | Path) -> None:
    data: dict = {"tau": net.tau, "weights": net.weights.tolist()}
    data["lengths"] = net.lengths.tolist()
    if net.uniform_capacity is not None:
        data["uniform_capacity"] = net.uniform_capacity
    else:
        data["capacities"] = net.capacities.tolist()
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)
        f.write("\n")


def is_uniform(net: PathNetwork) -> bool:
    """Whether every edge has the same capacity."""
    if net.uniform_capacity is not None:
        return True
    if net.n <= 2:
        return True
    return bool((net.capacities == net.capacities[0]).all())
