"""Ground truth: exact MST, brute-force tree enumeration, and the
rank-by-rank sorted-weight comparison between a candidate tree and the
optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CapExceeded, NotASpanningTree
from .graph import DisjointSet, EdgeSubset, Graph, fitness, subset_from_bits


def kruskal_mst(g: Graph) -> tuple[EdgeSubset, float]:
    """A minimum spanning tree and its weight.

    Ties between equal weights break on the lower edge index, so the
    result is deterministic. The weight is the fitness of the returned
    subset (summed in edge-index order), making it float-identical to
    what any other code path computes for the same tree.
    """
    order = sorted(range(g.m), key=lambda i: (g.edges[i].w, i))
    dsu = DisjointSet(g.n)
    bits = [0] * g.m
    for i in order:
        e = g.edges[i]
        if dsu.union(e.u, e.v):
            bits[i] = 1
        if dsu.count == 1:
            break
    tree = subset_from_bits(g, bits)
    return tree, float(fitness(g, tree))


def enumerate_spanning_trees(g: Graph, cap: int = 1_000_000) -> list[EdgeSubset]:
    """Every spanning tree as an EdgeSubset; intended for n <= 8.

    Scans all (n-1)-edge subsets, so the candidate count C(m, n-1) is
    pre-checked against the cap as well as the result count.
    """
    k = g.n - 1
    if math.comb(g.m, k) > max(cap, 10_000_000):
        raise CapExceeded(f"C({g.m},{k}) candidate subsets exceed the scan budget")
    trees = []
    for combo in combinations(range(g.m), k):
        dsu = DisjointSet(g.n)
        ok = True
        for i in combo:
            e = g.edges[i]
            if not dsu.union(e.u, e.v):
                ok = False
                break
        if ok and dsu.count == 1:
            bits = [0] * g.m
            for i in combo:
                bits[i] = 1
            trees.append(subset_from_bits(g, bits))
            if len(trees) > cap:
                raise CapExceeded(f"more than cap={cap} spanning trees")
    return trees


def spanning_tree_count(g: Graph) -> int:
    """Kirchhoff matrix-tree value: det of a Laplacian minor.

    Parallel edges contribute their multiplicity. The determinant of the
    integer minor is an integer; LU in doubles is exact only up to
    rounding, so the result is rounded (safe far beyond n <= 8 sizes).
    """
    lap = np.zeros((g.n, g.n), dtype=np.float64)
    for e in g.edges:
        lap[e.u, e.u] += 1.0
        lap[e.v, e.v] += 1.0
        lap[e.u, e.v] -= 1.0
        lap[e.v, e.u] -= 1.0
    minor = lap[1:, 1:]
    return int(round(float(np.linalg.det(minor))))


@dataclass(frozen=True)
class SortedWeights:
    """Tree edge weights sorted in non-increasing order; length n-1."""

    values: tuple[float, ...]


def _require_spanning_tree(g: Graph, tree: EdgeSubset) -> None:
    if tree.selected_count != g.n - 1 or tree.component_count != 1:
        raise NotASpanningTree(
            f"subset has {tree.selected_count} edges in "
            f"{tree.component_count} components; need {g.n - 1} edges, connected"
        )


def sorted_weights(g: Graph, tree: EdgeSubset) -> SortedWeights:
    _require_spanning_tree(g, tree)
    ws = sorted((e.w for e, b in zip(g.edges, tree.bits) if b), reverse=True)
    return SortedWeights(values=tuple(ws))


@dataclass(frozen=True)
class ApproxReport:
    """Both directions of the rank-by-rank sandwich against the optimum.

    dominance_ok: every candidate rank weight >= the optimum's (holds for
    all spanning trees). upper_ok: every candidate rank weight is strictly
    under (1+kappa) times the optimum's.
    """

    tree_weight: float
    opt_weight: float
    ratio: float
    per_rank_ratios: tuple[float, ...]
    dominance_ok: bool
    upper_ok: bool
    one_plus_kappa: float


def rankwise_check(g: Graph, candidate: EdgeSubset, kappa: float) -> ApproxReport:
    _require_spanning_tree(g, candidate)
    mst, opt_weight = kruskal_mst(g)
    cand_sorted = sorted_weights(g, candidate).values
    opt_sorted = sorted_weights(g, mst).values
    tree_weight = float(fitness(g, candidate))
    per_rank = tuple(c / o for c, o in zip(cand_sorted, opt_sorted))
    return ApproxReport(
        tree_weight=tree_weight,
        opt_weight=opt_weight,
        ratio=tree_weight / opt_weight,
        per_rank_ratios=per_rank,
        dominance_ok=all(c >= o for c, o in zip(cand_sorted, opt_sorted)),
        upper_ok=all(c < (1.0 + kappa) * o for c, o in zip(cand_sorted, opt_sorted)),
        one_plus_kappa=1.0 + kappa,
    )
