"""Set families over [n] stored as integer bitmasks.

Element ``i`` of ``[n]`` lives in bit ``i - 1``.  Bulk work (pairwise
statistics, neighbour lookups) runs on ``numpy.uint64`` arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, NamedTuple

import numpy as np

from .constraints import SpecLike, as_rules, forbidden_offsets, pair_forbidden
from .errors import DuplicateSet, ElementOutOfRange, UniverseTooLarge

MAX_N = 63

# Layers are enumerated by filtering arange(2**n) up to this universe size.
_DENSE_LAYER_N = 25
_MAX_LAYER = 60_000_000


def popcount(x: int) -> int:
    return x.bit_count()


def mask_from_elements(elements: Iterable[int], n: int) -> int:
    mask = 0
    for e in elements:
        e = int(e)
        if not 1 <= e <= n:
            raise ElementOutOfRange(f"element {e} outside [1, {n}]")
        mask |= 1 << (e - 1)
    return mask


def elements_of(mask: int) -> list:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def layer_masks(n: int, s: int) -> np.ndarray:
    """All masks of popcount ``s`` over ``[n]``, ascending, as uint64."""
    if not 0 <= s <= n:
        return np.zeros(0, dtype=np.uint64)
    size = comb(n, s)
    if size > _MAX_LAYER:
        raise UniverseTooLarge(f"layer {s} of [{n}] has {size} sets")
    if n <= _DENSE_LAYER_N:
        allm = np.arange(1 << n, dtype=np.uint64)
        return allm[np.bitwise_count(allm) == s]
    if s == 0:
        return np.zeros(1, dtype=np.uint64)
    idx = np.fromiter(combinations(range(n), s), dtype=np.dtype((np.int64, s)), count=size)
    masks = np.bitwise_or.reduce(np.left_shift(np.uint64(1), idx.astype(np.uint64)), axis=1)
    return np.sort(masks)


@dataclass(frozen=True)
class Family:
    """A universe size plus a duplicate-free, ordered tuple of masks."""

    n: int
    sets: tuple

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            if self.n > MAX_N:
                raise UniverseTooLarge(f"n={self.n} exceeds {MAX_N}")
            raise ValueError(f"universe size must be >= 1, got {self.n}")
        object.__setattr__(self, "sets", tuple(int(m) for m in self.sets))
        limit = 1 << self.n
        seen = set()
        for m in self.sets:
            if not 0 <= m < limit:
                raise ElementOutOfRange(f"mask {m} not a subset of [{self.n}]")
            if m in seen:
                raise DuplicateSet(f"duplicate set {elements_of(m)}")
            seen.add(m)

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __contains__(self, mask):
        return int(mask) in self.lookup

    @cached_property
    def lookup(self) -> frozenset:
        return frozenset(self.sets)

    @cached_property
    def masks(self) -> np.ndarray:
        return np.fromiter(self.sets, dtype=np.uint64, count=len(self.sets))

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.bitwise_count(self.masks).astype(np.int64)

    def layers(self) -> dict:
        """Map size -> ascending uint64 array of the masks of that size."""
        out = {}
        for s in np.unique(self.sizes):
            out[int(s)] = np.sort(self.masks[self.sizes == s])
        return out

    def element_lists(self) -> list:
        return [elements_of(m) for m in self.sets]

    def canonical(self) -> "Family":
        """Same family with sets sorted by (size, mask value)."""
        return Family(self.n, sorted(self.sets, key=lambda m: (m.bit_count(), m)))


def make_family(n: int, sets: Iterable = ()) -> Family:
    """Build a Family from element lists and/or raw masks.

    >>> make_family(4, [[1, 4], [2, 3]]).sets
    (9, 6)
    """
    if n > MAX_N:
        raise UniverseTooLarge(f"n={n} exceeds {MAX_N}")
    masks = []
    for item in sets:
        if isinstance(item, (int, np.integer)):
            masks.append(int(item))
        else:
            masks.append(mask_from_elements(item, n))
    return Family(n, tuple(masks))


class PairStats(NamedTuple):
    diff_ab: int
    diff_ba: int
    meet: int
    symdiff: int


def pair_stats(a: int, b: int) -> PairStats:
    ab = (a & ~b).bit_count()
    ba = (b & ~a).bit_count()
    return PairStats(ab, ba, (a & b).bit_count(), ab + ba)


@dataclass(frozen=True)
class Violation:
    a: int
    b: int
    rule: object

    def __str__(self):
        return f"{elements_of(self.a)} vs {elements_of(self.b)} violates {self.rule.render()}"


@dataclass(frozen=True)
class CheckResult:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# pairwise checking

_BLOCK = 1 << 22


def _pairwise(A: np.ndarray, B: np.ndarray, rule, symmetric_same_layer: bool):
    """Ordered pairs (a in A, b in B) forbidden by ``rule``; brute force in blocks."""
    found = []
    if len(A) == 0 or len(B) == 0:
        return found
    rows = max(1, _BLOCK // len(B))
    for start in range(0, len(A), rows):
        a = A[start:start + rows, None]
        ab = np.bitwise_count(a & ~B[None, :]).astype(np.int64)
        ba = np.bitwise_count(B[None, :] & ~a).astype(np.int64)
        meet = np.bitwise_count(a & B[None, :]).astype(np.int64)
        bad = np.asarray(rule.forbids(ab, ba, meet)) & (a != B[None, :])
        if symmetric_same_layer:
            bad &= a < B[None, :]
        ii, jj = np.nonzero(bad)
        found.extend(zip(A[start + ii].tolist(), B[jj].tolist()))
    return found


def _neighbours(A: np.ndarray, B: np.ndarray, n: int, a: int, b: int, symmetric_same_layer: bool):
    """Ordered pairs with ``A\\B`` of size a and ``B\\A`` of size b, by local edits.

    Each candidate partner is ``A - E + F`` with |E| = a, E inside A, and |F| = b
    disjoint from A; membership is tested by binary search in sorted ``B``.
    """
    found = []
    one = np.uint64(1)
    bits = [one << np.uint64(i) for i in range(n)]
    for E in combinations(range(n), a):
        emask = np.uint64(0)
        for i in E:
            emask |= bits[i]
        hasE = A[(A & emask) == emask]
        if len(hasE) == 0:
            continue
        rest = [i for i in range(n) if i not in E]
        for F in combinations(rest, b):
            fmask = np.uint64(0)
            for i in F:
                fmask |= bits[i]
            src = hasE[(hasE & fmask) == 0]
            if len(src) == 0:
                continue
            cand = (src ^ emask) | fmask
            pos = np.searchsorted(B, cand)
            pos[pos == len(B)] = 0
            hit = B[pos] == cand
            if symmetric_same_layer:
                hit &= src < cand
            if hit.any():
                found.extend(zip(src[hit].tolist(), cand[hit].tolist()))
    return found


def _neighbour_cost(n: int, offsets, s: int, t: int, size_a: int) -> int:
    ops = sum(comb(n, a) * comb(n - a, a + t - s) for a in offsets)
    return ops * (size_a + 2000)


def _violations(f: Family, rules, first_only: bool):
    layers = f.layers()
    n = f.n
    out = []
    for rule in rules:
        for s, A in layers.items():
            for t, B in layers.items():
                if rule.symmetric and t < s:
                    continue
                offsets = forbidden_offsets(rule, n, s, t)
                if not offsets:
                    continue
                same = rule.symmetric and s == t
                if _neighbour_cost(n, offsets, s, t, len(A)) < len(A) * len(B):
                    pairs = []
                    for a in offsets:
                        pairs.extend(_neighbours(A, B, n, a, a + t - s, same))
                else:
                    pairs = _pairwise(A, B, rule, same)
                out.extend(Violation(a, b, rule) for a, b in pairs)
                if first_only and out:
                    return out[:1]
    return out


def check_family(f: Family, spec: SpecLike, first_only: bool = False) -> CheckResult:
    """Check every ordered pair of distinct sets of ``f`` against ``spec``.

    Asymmetric rules are tested in both orders.  Symmetric rules report each
    offending unordered pair once, smaller mask first.  Violations come back
    sorted, so the result does not depend on the order of ``f.sets``.
    """
    rules = as_rules(spec)
    found = _violations(f, rules, first_only)
    rank = {r: i for i, r in enumerate(rules)}
    found.sort(key=lambda v: (rank[v.rule], v.a, v.b))
    return CheckResult(tuple(found))


def is_valid(f: Family, spec: SpecLike) -> bool:
    return check_family(f, spec, first_only=True).ok


# ---------------------------------------------------------------------------
# conflict graph


@dataclass(frozen=True)
class ConflictGraph:
    """Graph on subsets of [n]; edges join pairs forbidden by the rules.

    ``adjacency[i]`` is a Python int whose bit ``j`` is set iff vertex ``j``
    conflicts with vertex ``i``.  Vertices are sorted by mask value.
    """

    n: int
    vertices: tuple
    adjacency: tuple

    def __len__(self):
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return sum(a.bit_count() for a in self.adjacency) // 2

    def degree(self, i: int) -> int:
        return self.adjacency[i].bit_count()

    def edges(self):
        for i, row in enumerate(self.adjacency):
            row >>= i + 1
            j = i + 1
            while row:
                if row & 1:
                    yield self.vertices[i], self.vertices[j]
                row >>= 1
                j += 1

    def index_of(self, mask: int) -> int:
        return self._index[int(mask)]

    @cached_property
    def _index(self) -> dict:
        return {m: i for i, m in enumerate(self.vertices)}

    def is_independent(self, masks: Iterable[int]) -> bool:
        chosen = 0
        idx = [self._index[int(m)] for m in masks]
        for i in idx:
            chosen |= 1 << i
        return all(not (self.adjacency[i] & chosen) for i in idx)


def _bools_to_int(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def conflict_graph(
    n: int,
    spec: SpecLike,
    layer_range: tuple | None = None,
    max_n: int = 20,
    max_vertices: int = 1 << 20,
) -> ConflictGraph:
    """Conflict graph over all subsets of [n], or only sizes in ``layer_range``.

    Valid families are exactly the independent sets of this graph.
    """
    rules = as_rules(spec)
    if layer_range is None:
        if n > max_n:
            raise UniverseTooLarge(f"n={n} exceeds conflict graph cap {max_n}")
        lo, hi = 0, n
    else:
        lo, hi = max(0, int(layer_range[0])), min(n, int(layer_range[1]))
        if n > MAX_N:
            raise UniverseTooLarge(f"n={n} exceeds {MAX_N}")
    count = sum(comb(n, s) for s in range(lo, hi + 1))
    if count > max_vertices:
        raise UniverseTooLarge(f"{count} vertices exceeds cap {max_vertices}")
    parts = [layer_masks(n, s) for s in range(lo, hi + 1)]
    V = np.sort(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.uint64)
    adjacency = []
    for i in range(len(V)):
        v = V[i]
        ab = np.bitwise_count(v & ~V).astype(np.int64)
        ba = np.bitwise_count(V & ~v).astype(np.int64)
        meet = np.bitwise_count(v & V).astype(np.int64)
        row = np.asarray(pair_forbidden(rules, ab, ba, meet), dtype=bool)
        row[i] = False
        adjacency.append(_bools_to_int(row))
    return ConflictGraph(n, tuple(int(x) for x in V), tuple(adjacency))


# ---------------------------------------------------------------------------
# sizes, bands, LYM


def default_band(n: int) -> tuple:
    """Real-valued band ``[n/2 - n^(2/3), n/2 + n^(2/3)]``."""
    w = n ** (2.0 / 3.0)
    return (n / 2 - w, n / 2 + w)


def size_in_band(n: int, s: int, band: tuple | None = None) -> bool:
    """Inclusive band test for a set size; any n (no universe cap).

    The default band is decided exactly: ``|n - 2s| <= 2 n^(2/3)`` is tested
    as ``|n - 2s|^3 <= 8 n^2``.
    """
    if band is None:
        d = abs(n - 2 * s)
        return d ** 3 <= 8 * n * n
    lo, hi = band
    return lo <= s <= hi


def truncate_to_band(f: Family, band: tuple | None = None):
    """Drop sets whose size lies outside ``band`` (inclusive, real endpoints).

    Returns ``(kept_family, removed_count)``.
    """
    kept = tuple(m for m in f.sets if size_in_band(f.n, m.bit_count(), band))
    return Family(f.n, kept), len(f) - len(kept)


def layer_counts(f: Family) -> dict:
    counts: dict = {}
    for m in f.sets:
        s = m.bit_count()
        counts[s] = counts.get(s, 0) + 1
    return counts


def lym_sum(f: Family, sizes: Iterable[int] | None = None) -> Fraction:
    """Exact ``sum_s |f^(s)| / C(n, s)``, optionally only over ``sizes``."""
    counts = layer_counts(f)
    if sizes is not None:
        keep = set(sizes)
        counts = {s: c for s, c in counts.items() if s in keep}
    return sum((Fraction(c, comb(f.n, s)) for s, c in counts.items()), Fraction(0))


def partition_by_size_mod(f: Family, k: int) -> list:
    if k < 1:
        raise ValueError(f"modulus must be >= 1, got {k}")
    buckets = [[] for _ in range(k)]
    for m in f.sets:
        buckets[m.bit_count() % k].append(m)
    return [Family(f.n, tuple(b)) for b in buckets]


def central_binomial(n: int) -> int:
    return comb(n, n // 2)


def pigeonhole_floor(n: int, k: int = 1) -> int:
    """``ceil(C(n, n//2) / n^k)`` in exact integer arithmetic."""
    return -(-central_binomial(n) // n ** k)


# ---------------------------------------------------------------------------
# JSON


def family_to_json(f: Family) -> dict:
    c = f.canonical()
    return {"n": c.n, "sets": c.element_lists()}


def family_from_json(obj: dict) -> Family:
    n = int(obj["n"])
    if "sets" in obj:
        for s in obj["sets"]:
            if any(b <= a for a, b in zip(s, s[1:])):
                raise ValueError(f"set {s} is not strictly increasing")
        return make_family(n, [list(s) for s in obj["sets"]])
    if "masks" in obj:
        return make_family(n, [int(m) for m in obj["masks"]])
    raise ValueError("family JSON needs 'sets' or 'masks'")


def dumps_family(f: Family) -> str:
    return json.dumps(family_to_json(f), separators=(",", ":"))


def dump_family(f: Family, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_family(f) + "\n")


def load_family(path) -> Family:
    with open(path) as fh:
        return family_from_json(json.load(fh))
