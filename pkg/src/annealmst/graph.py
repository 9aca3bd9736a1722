"""Weighted graphs, edge-subset search states, and the objective function.

A state is a bit string over the m edges; its fitness is the total selected
weight when the selected subgraph spans all vertices and is connected, and
the INFEASIBLE sentinel otherwise. Graphs are immutable and safe to share
across concurrent trials; subsets are plain values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadVertexIndex,
    DisconnectedInput,
    IndexOutOfRange,
    NonPositiveWeight,
)


class Infeasible:
    """Objective value of a disconnected subset.

    A singleton that compares strictly greater than every number, so
    rejected proposals order correctly without the overflow hazards of a
    huge float stand-in.
    """

    _singleton = None

    def __new__(cls):
        if cls._singleton is None:
            cls._singleton = super().__new__(cls)
        return cls._singleton

    def __repr__(self) -> str:
        return "INFEASIBLE"

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash(Infeasible)

    def __gt__(self, other) -> bool:
        return not isinstance(other, Infeasible)

    def __ge__(self, other) -> bool:
        return True

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return isinstance(other, Infeasible)


INFEASIBLE = Infeasible()

Fitness = Union[float, Infeasible]


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    w: float


class DisjointSet:
    """Union-find with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True


@dataclass(frozen=True)
class Graph:
    """Undirected connected multigraph with positive finite edge weights."""

    n: int
    edges: tuple[Edge, ...]
    w_min: float
    w_max: float

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Endpoint and weight arrays for the jit engine path."""
        eu = np.fromiter((e.u for e in self.edges), dtype=np.int64, count=self.m)
        ev = np.fromiter((e.v for e in self.edges), dtype=np.int64, count=self.m)
        ew = np.fromiter((e.w for e in self.edges), dtype=np.float64, count=self.m)
        return eu, ev, ew

    def total_weight(self) -> float:
        return float(sum(e.w for e in self.edges))


def build_graph(n: int, edge_list: Iterable[tuple[int, int, float]]) -> Graph:
    """Validate and freeze a graph from (u, v, w) triples.

    Rejects out-of-range or self-loop endpoints, non-positive or non-finite
    weights, and disconnected inputs. Parallel edges are permitted.
    """
    if n < 2:
        raise BadVertexIndex(f"need at least 2 vertices, got n={n}")
    edges = []
    dsu = DisjointSet(n)
    for u, v, w in edge_list:
        if not (0 <= u < n and 0 <= v < n):
            raise BadVertexIndex(f"endpoint out of range in ({u}, {v})")
        if u == v:
            raise BadVertexIndex(f"self-loop at vertex {u}")
        w = float(w)
        if not (w > 0.0) or w != w or w == float("inf"):
            raise NonPositiveWeight(f"edge ({u}, {v}) has weight {w!r}")
        edges.append(Edge(int(u), int(v), w))
        dsu.union(u, v)
    if not edges:
        raise DisconnectedInput("graph has no edges")
    if dsu.count != 1:
        raise DisconnectedInput(f"{dsu.count} components in input graph")
    ws = [e.w for e in edges]
    return Graph(n=n, edges=tuple(edges), w_min=min(ws), w_max=max(ws))


@dataclass(frozen=True)
class EdgeSubset:
    """A bit string over the edges plus cached connectivity facts.

    labels[v] is the smallest vertex index in v's component, so equal
    subsets always carry identical labels regardless of build order.
    """

    bits: tuple[int, ...]
    selected_count: int
    component_count: int
    labels: tuple[int, ...]

    def is_connected(self) -> bool:
        return self.component_count == 1


def _canonical_labels(n: int, dsu: DisjointSet) -> tuple[int, ...]:
    rep: dict[int, int] = {}
    for v in range(n):
        root = dsu.find(v)
        if root not in rep or v < rep[root]:
            rep[root] = v
    return tuple(rep[dsu.find(v)] for v in range(n))


def subset_from_bits(g: Graph, bits: Sequence[int]) -> EdgeSubset:
    """Build a subset state, computing connectivity from scratch."""
    if len(bits) != g.m:
        raise IndexOutOfRange(f"bit string length {len(bits)} != m={g.m}")
    norm = tuple(1 if b else 0 for b in bits)
    dsu = DisjointSet(g.n)
    for e, b in zip(g.edges, norm):
        if b:
            dsu.union(e.u, e.v)
    return EdgeSubset(
        bits=norm,
        selected_count=sum(norm),
        component_count=dsu.count,
        labels=_canonical_labels(g.n, dsu),
    )


def all_ones(g: Graph) -> EdgeSubset:
    """The initial search state: every edge selected."""
    return subset_from_bits(g, (1,) * g.m)


def fitness(g: Graph, x: EdgeSubset) -> Fitness:
    """Sum of selected weights when connected, INFEASIBLE otherwise."""
    if len(x.bits) != g.m:
        raise IndexOutOfRange(f"bit string length {len(x.bits)} != m={g.m}")
    if x.component_count != 1:
        return INFEASIBLE
    return float(sum(e.w for e, b in zip(g.edges, x.bits) if b))


def flip(g: Graph, x: EdgeSubset, i: int) -> EdgeSubset:
    """The neighbor of x with bit i toggled; x itself is untouched.

    Adding an edge merges at most two components in O(n); removing one
    recomputes connectivity from scratch, which is the simple O(m) route
    and is cross-checked by tests.
    """
    if not 0 <= i < g.m:
        raise IndexOutOfRange(f"edge index {i} out of range for m={g.m}")
    if x.bits[i]:
        bits = x.bits[:i] + (0,) + x.bits[i + 1 :]
        return subset_from_bits(g, bits)
    bits = x.bits[:i] + (1,) + x.bits[i + 1 :]
    e = g.edges[i]
    lu, lv = x.labels[e.u], x.labels[e.v]
    if lu == lv:
        return EdgeSubset(bits, x.selected_count + 1, x.component_count, x.labels)
    keep, drop = (lu, lv) if lu < lv else (lv, lu)
    labels = tuple(keep if lab == drop else lab for lab in x.labels)
    return EdgeSubset(bits, x.selected_count + 1, x.component_count - 1, labels)


def component_count_below(g: Graph, threshold: float) -> int:
    """Components of the subgraph keeping only edges of weight <= threshold."""
    if not threshold > 0.0:
        raise NonPositiveWeight(f"threshold must be positive, got {threshold!r}")
    dsu = DisjointSet(g.n)
    for e in g.edges:
        if e.w <= threshold:
            dsu.union(e.u, e.v)
    return dsu.count
