"""Exact maximum families under forbidden-pair rules.

Valid families are the independent sets of the conflict graph, i.e. the
cliques of its complement.  ``max_independent_set`` runs a bitset
branch-and-bound in the style of Tomita's MCQ: candidates are greedily
coloured (each colour class is a clique of the conflict graph, so at most one
member can be chosen) and a branch is cut as soon as the current set plus the
colour count cannot beat the incumbent.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Optional

import numpy as np

from .constraints import SpecLike, as_rules, pair_forbidden
from .errors import UniverseTooLarge
from .family import ConflictGraph, Family, conflict_graph, family_to_json, pair_stats


@dataclass(frozen=True)
class SearchResult:
    optimum: int
    witness: Family
    nodes_explored: int
    proven_optimal: bool
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "optimum": self.optimum,
            "witness": family_to_json(self.witness),
            "nodes_explored": self.nodes_explored,
            "proven_optimal": self.proven_optimal,
        }


class _BudgetExhausted(Exception):
    pass


def max_independent_set(
    g: ConflictGraph,
    budget: Optional[int] = None,
    initial: Optional[Iterable[int]] = None,
) -> SearchResult:
    """Maximum independent set of ``g`` by branch and bound.

    ``budget`` caps the number of search nodes; when it runs out the best
    set found so far is returned with ``proven_optimal=False``.  ``initial``
    is an optional independent set of vertex masks used as the first incumbent.
    """
    t0 = time.perf_counter()
    N = len(g)
    if N > 1 << 20:
        raise UniverseTooLarge(f"{N} vertices exceeds 2^20")
    full = (1 << N) - 1
    # compatibility graph = complement of the conflict graph
    deg = [N - 1 - g.degree(v) for v in range(N)]
    order = sorted(range(N), key=lambda v: (-deg[v], g.vertices[v]))
    pos = {v: p for p, v in enumerate(order)}
    conflict = [0] * N
    for p, v in enumerate(order):
        row = g.adjacency[v]
        bits = 0
        while row:
            low = row & -row
            bits |= 1 << pos[low.bit_length() - 1]
            row ^= low
        conflict[p] = bits
    compat = [full & ~conflict[p] & ~(1 << p) for p in range(N)]

    best: list = []
    if initial is not None:
        initial = list(initial)
        init = [pos[g.index_of(m)] for m in initial]
        if not g.is_independent(initial):
            raise ValueError("initial family is not independent in the conflict graph")
        best = init
    # greedy start: take compatible vertices in order
    greedy, cand = [], full
    while cand:
        p = (cand & -cand).bit_length() - 1
        greedy.append(p)
        cand &= compat[p]
    if len(greedy) > len(best):
        best = greedy

    state = {"nodes": 0, "best": best}
    current: list = []

    def colour_sort(P):
        verts, cols = [], []
        colour = 0
        U = P
        while U:
            colour += 1
            Q = U
            while Q:
                low = Q & -Q
                v = low.bit_length() - 1
                U ^= low
                Q ^= low
                Q &= conflict[v]
                verts.append(v)
                cols.append(colour)
        return verts, cols

    def expand(P):
        state["nodes"] += 1
        if budget is not None and state["nodes"] > budget:
            raise _BudgetExhausted
        verts, cols = colour_sort(P)
        for idx in range(len(verts) - 1, -1, -1):
            if len(current) + cols[idx] <= len(state["best"]):
                return
            v = verts[idx]
            current.append(v)
            newP = P & compat[v]
            if newP:
                expand(newP)
            elif len(current) > len(state["best"]):
                state["best"] = list(current)
            current.pop()
            P &= ~(1 << v)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, N + 1000))
    proven = True
    try:
        if N:
            expand(full)
    except _BudgetExhausted:
        proven = False
    finally:
        sys.setrecursionlimit(limit)

    chosen = sorted(g.vertices[order[p]] for p in state["best"])
    return SearchResult(
        optimum=len(chosen),
        witness=Family(g.n, tuple(chosen)),
        nodes_explored=min(state["nodes"], budget) if budget is not None else state["nodes"],
        proven_optimal=proven,
        wall_time=time.perf_counter() - t0,
    )


def max_family_exhaustive(n: int, spec: SpecLike, layer_range: Optional[tuple] = None) -> SearchResult:
    """Ground truth: test every subfamily of the allowed subsets of [n].

    Independent of the conflict-graph code: pairs are classified with
    ``pair_stats`` directly.  Ties go to the subfamily with the smallest code,
    where bit ``v`` of the code stands for the v-th allowed subset.
    """
    if n > 4:
        raise UniverseTooLarge(f"exhaustive search needs n <= 4, got {n}")
    t0 = time.perf_counter()
    rules = as_rules(spec)
    lo, hi = (0, n) if layer_range is None else layer_range
    verts = [m for m in range(1 << n) if lo <= m.bit_count() <= hi]
    V = len(verts)
    bad_pairs = []
    for i, j in combinations(range(V), 2):
        st = pair_stats(verts[i], verts[j])
        if pair_forbidden(rules, st.diff_ab, st.diff_ba, st.meet):
            bad_pairs.append((1 << i) | (1 << j))
    codes = np.arange(1 << V, dtype=np.int64)
    ok = np.ones(len(codes), dtype=bool)
    for pair in bad_pairs:
        ok &= (codes & pair) != pair
    sizes = np.where(ok, np.bitwise_count(codes).astype(np.int64), -1)
    best = int(np.argmax(sizes))
    witness = [verts[v] for v in range(V) if (best >> v) & 1]
    return SearchResult(
        optimum=int(sizes[best]),
        witness=Family(n, tuple(witness)),
        nodes_explored=len(codes),
        proven_optimal=True,
        wall_time=time.perf_counter() - t0,
    )


class OracleMismatch(AssertionError):
    pass


def max_family(
    n: int,
    spec: SpecLike,
    layer_range: Optional[tuple] = None,
    budget: Optional[int] = None,
    initial: Optional[Iterable[int]] = None,
    cross_check: bool = True,
) -> SearchResult:
    """Largest family over [n] (optionally sizes in ``layer_range``) obeying ``spec``.

    For ``n <= 4`` a completed search is compared with the exhaustive oracle.
    """
    if layer_range is not None:
        lo, hi = int(layer_range[0]), int(layer_range[1])
        count = sum(comb(n, s) for s in range(max(0, lo), min(n, hi) + 1))
        if count > 1 << 20:
            raise UniverseTooLarge(f"{count} vertices exceeds 2^20")
        g = conflict_graph(n, spec, (lo, hi), max_n=63)
    else:
        g = conflict_graph(n, spec)
    res = max_independent_set(g, budget=budget, initial=initial)
    if cross_check and n <= 4 and res.proven_optimal:
        oracle = max_family_exhaustive(n, spec, layer_range)
        if oracle.optimum != res.optimum:
            raise OracleMismatch(
                f"branch and bound found {res.optimum}, exhaustive oracle {oracle.optimum}"
            )
    return res
