"""Seeded instance generators.

Every family builds a uniform random spanning tree from a Prufer sequence
(connectivity by construction, no rejection sampling) and then adds
distinct extra edges; weights are drawn afterwards, independent of the
topology. Identical specs produce identical graphs byte for byte.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import InfeasibleSpec
from .graph import Graph, build_graph
from .rng import Xoshiro256PP

FAMILIES = ("separated", "uniform", "tree-plus", "complete")


@dataclass(frozen=True)
class GenSpec:
    """What to generate.

    m defaults to n-1 (a bare tree); the complete family fixes it at
    n(n-1)/2. The separated family needs eps and draws weights from the
    level ladder w_min*(1+eps)^k, either the given weight_levels or the
    ladder filling weight_range.
    """

    family: str
    n: int
    m: int | None = None
    eps: float | None = None
    weight_range: tuple[float, float] = (1.0, 100.0)
    weight_levels: tuple[float, ...] | None = None
    seed: int = 0


def _resolve_m(spec: GenSpec) -> int:
    full = spec.n * (spec.n - 1) // 2
    if spec.family == "complete":
        if spec.m is not None and spec.m != full:
            raise InfeasibleSpec(f"complete family fixes m={full}, got {spec.m}")
        return full
    m = spec.m if spec.m is not None else spec.n - 1
    if m < spec.n - 1:
        raise InfeasibleSpec(f"m={m} below the spanning minimum {spec.n - 1}")
    if m > full:
        raise InfeasibleSpec(f"m={m} exceeds the simple-graph maximum {full}")
    return m


def _prufer_tree(n: int, rng: Xoshiro256PP) -> list[tuple[int, int]]:
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def separation_levels(lo: float, hi: float, eps: float) -> tuple[float, ...]:
    """The ladder lo*(1+eps)^k clipped to [lo, hi]."""
    if not 0.0 < lo <= hi:
        raise InfeasibleSpec(f"need 0 < lo <= hi, got {lo!r}, {hi!r}")
    levels = [lo]
    while levels[-1] * (1.0 + eps) <= hi:
        levels.append(levels[-1] * (1.0 + eps))
    return tuple(levels)


def generate(spec: GenSpec) -> Graph:
    """Build the graph the spec describes; deterministic in the seed."""
    if spec.family not in FAMILIES:
        raise InfeasibleSpec(f"unknown family {spec.family!r}")
    if spec.n < 2:
        raise InfeasibleSpec(f"need n >= 2, got {spec.n}")
    if spec.family == "separated":
        if spec.eps is None or spec.eps <= 0.0:
            raise InfeasibleSpec("separated family needs eps > 0")
    m = _resolve_m(spec)
    rng = Xoshiro256PP(spec.seed)
    tree = _prufer_tree(spec.n, rng)
    tree_set = set(tree)
    pool = [
        (u, v)
        for u in range(spec.n)
        for v in range(u + 1, spec.n)
        if (u, v) not in tree_set
    ]
    extra = rng.sample_prefix(pool, m - (spec.n - 1))
    pairs = tree + extra

    lo, hi = spec.weight_range
    if spec.family == "separated":
        levels = spec.weight_levels
        if levels is None:
            levels = separation_levels(lo, hi, spec.eps)
        else:
            for w0, w1 in zip(levels, levels[1:]):
                if w1 < (1.0 + spec.eps) * w0:
                    raise InfeasibleSpec("weight_levels break the separation gap")
        weights = [levels[rng.randrange(len(levels))] for _ in pairs]
    else:
        if not 0.0 < lo <= hi:
            raise InfeasibleSpec(f"need 0 < lo <= hi, got {lo!r}, {hi!r}")
        weights = [rng.uniform(lo, hi) for _ in pairs]

    g = build_graph(spec.n, [(u, v, w) for (u, v), w in zip(pairs, weights)])
    if spec.family == "separated":
        assert check_separated(g, spec.eps)
    return g


def check_separated(g: Graph, eps: float, rtol: float = 1e-12) -> bool:
    """True iff all strictly ordered weight pairs keep the (1+eps) gap.

    Checking adjacent distinct weights in sorted order suffices: if each
    adjacent ratio is at least 1+eps, every wider pair's ratio is too.
    rtol absorbs decimal round-tripping of serialized weights.
    """
    if eps <= 0.0:
        raise InfeasibleSpec(f"need eps > 0, got {eps!r}")
    distinct = sorted(set(e.w for e in g.edges))
    for w0, w1 in zip(distinct, distinct[1:]):
        if w1 < (1.0 + eps) * w0 * (1.0 - rtol):
            return False
    return True
