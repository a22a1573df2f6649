"""Random partial chains built from uniformly random permutations.

Two chain shapes are supported:

* single-element chains ``C[i, j] = {s(1..i)} | {s(j)}`` for ``i`` in
  ``I = [1, m]`` and ``j`` in ``J = [m+1, n]``;
* block chains ``C[i, S] = s({1..ik}) | s(S)`` with ``S`` an ``n/3``-subset
  of ``J = [n/3 + 1, n]`` and ``i`` in ``1..n/(3k)``.

Randomness: sample ``index`` under ``seed`` is drawn from
``numpy.random.PCG64(SeedSequence([seed, index]))``.  Every sample is a pure
function of ``(seed, index)`` and the reductions are integer sums, so the
estimates are bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .constraints import ForbiddenDifference
from .errors import (
    BadBand,
    BadBlockStructure,
    FamilyOutsideBand,
    PreconditionViolated,
    SplitDegenerate,
)
from .family import Family, is_valid, layer_counts

_MASK64 = (1 << 64) - 1
_CHUNK = 4096


# ---------------------------------------------------------------------------
# splits and band arithmetic (exact: n^(2/3) compared through cubes)


def _le_n_two_thirds(x2: int, n: int) -> bool:
    """``x2 / 2 <= n^(2/3)`` for an integer ``x2``."""
    return x2 <= 0 or x2 ** 3 <= 8 * n * n


def default_band_floor(n: int) -> int:
    """Smallest size ``s`` with ``s >= n/2 - n^(2/3)``, but at least 2."""
    s = 0
    while not _le_n_two_thirds(n - 2 * s, n):
        s += 1
    return max(2, s)


@dataclass(frozen=True)
class ChainSplit:
    n: int
    m: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n - 1:
            raise SplitDegenerate(f"split point m={self.m} leaves I or J empty for n={self.n}")

    @property
    def I(self) -> range:
        return range(1, self.m + 1)

    @property
    def J(self) -> range:
        return range(self.m + 1, self.n + 1)


def default_split(n: int) -> ChainSplit:
    """``m = floor(n/2 + n^(2/3))``, computed exactly; requires n >= 10."""
    if n < 10:
        raise SplitDegenerate(f"default split needs n >= 10, got {n}")
    m = 0
    while _le_n_two_thirds(2 * (m + 1) - n, n):
        m += 1
    if m > n - 1:
        raise SplitDegenerate(f"n={n}: floor(n/2 + n^(2/3)) = {m} leaves J empty")
    return ChainSplit(n, m)


# ---------------------------------------------------------------------------
# permutations


@dataclass(frozen=True)
class PermSample:
    """``sigma[p - 1]`` is the image of ``p``; values are 1..n."""

    sigma: np.ndarray
    seed: Optional[int] = None
    index: Optional[int] = None

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=np.int64)
        if not np.array_equal(np.sort(s), np.arange(1, len(s) + 1)):
            raise ValueError("sigma is not a permutation of 1..n")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @property
    def n(self) -> int:
        return len(self.sigma)

    @classmethod
    def identity(cls, n: int) -> "PermSample":
        return cls(np.arange(1, n + 1))

    def bits(self) -> np.ndarray:
        """``bits[p - 1]`` is the mask of the single element ``sigma(p)``."""
        return np.left_shift(np.uint64(1), (self.sigma - 1).astype(np.uint64))


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & _MASK64, index])))


def sample_permutation(n: int, seed: int = 0, index: int = 0) -> PermSample:
    """Uniform permutation of [n] for sample ``index`` of stream ``seed``."""
    sigma = sample_rng(seed, index).permutation(n) + 1
    return PermSample(sigma, seed, index)


# ---------------------------------------------------------------------------
# single-element chains


def chains_k1(sigma: PermSample, split: ChainSplit) -> np.ndarray:
    """Array ``C`` of shape (|I|, |J|) with ``C[i-1, j-m-1]`` the mask of C_{i,j}."""
    if sigma.n != split.n:
        raise ValueError("permutation and split disagree on n")
    bits = sigma.bits()
    prefix = np.bitwise_or.accumulate(bits[: split.m])
    return prefix[:, None] | bits[None, split.m:]


@dataclass(frozen=True)
class IncidenceStats:
    sum_x: int
    first_hit: Optional[tuple]
    hits_by_size: dict
    chain_count: int = 0
    fired: tuple = ()


def _member(sorted_masks: np.ndarray, query: np.ndarray) -> np.ndarray:
    if len(sorted_masks) == 0:
        return np.zeros(query.shape, dtype=bool)
    pos = np.searchsorted(sorted_masks, query)
    pos[pos == len(sorted_masks)] = 0
    return sorted_masks[pos] == query


def incidence_k1(f: Family, sigma: PermSample, split: ChainSplit) -> IncidenceStats:
    """Indicators X_{i,j}: 1 on the first set of chain j (in nesting order) lying in f."""
    C = chains_k1(sigma, split)
    inside = _member(np.sort(f.masks), C)
    fired = []
    for col in range(C.shape[1]):
        rows = np.flatnonzero(inside[:, col])
        if len(rows):
            fired.append((int(rows[0]) + 1, split.m + 1 + col))
    hits: dict = {}
    for i in np.flatnonzero(inside.any(axis=1)):
        hits[int(i) + 2] = int(inside[i].sum())  # C_{i,j} has size i + 1
    return IncidenceStats(
        sum_x=len(fired),
        first_hit=fired[0] if fired else None,
        hits_by_size=hits,
        chain_count=C.size,
        fired=tuple(fired),
    )


def batch_sum_x_k1(family_sorted: np.ndarray, split: ChainSplit, seed: int, indices: range) -> np.ndarray:
    """``sum_x`` for each sample index in ``indices`` (vectorized over the batch)."""
    n, m = split.n, split.m
    sig = np.empty((len(indices), n), dtype=np.int64)
    for row, idx in enumerate(indices):
        sig[row] = sample_rng(seed, idx).permutation(n)
    bits = np.left_shift(np.uint64(1), sig.astype(np.uint64))
    prefix = np.bitwise_or.accumulate(bits[:, :m], axis=1)
    C = prefix[:, :, None] | bits[:, None, m:]
    inside = _member(family_sorted, C)
    return inside.any(axis=1).sum(axis=1)


def lower_factor(s: int, a: int) -> float:
    """Telescoped product of (1 - 1/t) for t = a .. s-1, i.e. (a-1)/(s-1)."""
    if a < 2 or a > s:
        raise BadBand(f"need 2 <= band floor <= size, got floor={a}, size={s}")
    return float(lower_factor_exact(s, a))


def lower_factor_exact(s: int, a: int) -> Fraction:
    if a < 2 or a > s:
        raise BadBand(f"need 2 <= band floor <= size, got floor={a}, size={s}")
    return Fraction(a - 1, s - 1)


# ---------------------------------------------------------------------------
# estimates


@dataclass(frozen=True)
class BoundEstimate:
    samples: int
    mean: float
    std_err: float
    analytic_lower: float
    analytic_upper: float
    L: float
    split: dict
    band_floor: int
    seed: int
    ceiling: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def within(self, value: float, sigmas: float = 4.0) -> bool:
        return abs(self.mean - value) <= sigmas * self.std_err

    def to_json(self) -> dict:
        out = asdict(self)
        if self.ceiling is None:
            out.pop("ceiling")
        if not self.extra:
            out.pop("extra")
        return out


def _moments(batch_fn, samples: int, threads: int) -> tuple:
    """Integer (sum, sum of squares) of per-sample values, chunked by index."""
    chunks = [range(s, min(s + _CHUNK, samples)) for s in range(0, samples, _CHUNK)]

    def run(r):
        v = batch_fn(r).astype(np.int64)
        return int(v.sum()), int((v * v).sum())

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(r) for r in chunks]
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def _mean_stderr(total: int, total_sq: int, samples: int) -> tuple:
    if samples == 0:
        return 0.0, 0.0
    mean = Fraction(total, samples)
    if samples < 2:
        return float(mean), 0.0
    var = (Fraction(total_sq) - samples * mean * mean) / (samples - 1)
    return float(mean), math.sqrt(max(0.0, float(var)) / samples)


def estimate_k1(
    f: Family,
    split: ChainSplit,
    band_floor: Optional[int] = None,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
) -> BoundEstimate:
    """Monte-Carlo mean of ``sum_x`` with its exact analytic sandwich.

    ``analytic_upper = |J| * L`` and ``analytic_lower = min_s (a-1)/(s-1) * |J| * L``
    where ``L`` is the LYM sum of ``f`` and ``a`` the band floor.
    """
    if f.n != split.n:
        raise ValueError("family and split disagree on n")
    if band_floor is None:
        band_floor = default_band_floor(f.n)
    if band_floor < 2:
        raise BadBand(f"band floor must be >= 2, got {band_floor}")
    counts = layer_counts(f)
    for s in counts:
        if s < band_floor or s > split.m + 1:
            raise FamilyOutsideBand(
                f"set size {s} outside [{band_floor}, {split.m + 1}]"
            )
    if not is_valid(f, ForbiddenDifference(1)):
        raise PreconditionViolated("family contains a pair with |A\\B| = 1")
    nJ = len(split.J)
    L = sum((Fraction(c, comb(f.n, s)) for s, c in counts.items()), Fraction(0))
    upper = nJ * L
    factor = min((lower_factor_exact(s, band_floor) for s in counts), default=Fraction(1))
    lower = factor * upper
    fam = np.sort(f.masks)
    total, total_sq = _moments(
        lambda r: batch_sum_x_k1(fam, split, seed, r), samples, threads
    )
    mean, se = _mean_stderr(total, total_sq, samples)
    return BoundEstimate(
        samples=samples,
        mean=mean,
        std_err=se,
        analytic_lower=float(lower),
        analytic_upper=float(upper),
        L=float(L),
        split={"n": split.n, "m": split.m},
        band_floor=band_floor,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# block chains


def _block_shape(n: int, k: int) -> int:
    if k < 1 or n % (3 * k):
        raise BadBlockStructure(f"n={n} is not a multiple of 3k={3 * k}")
    return n // 3


def block_chains(sigma: PermSample, S: int, k: int) -> np.ndarray:
    """Masks of C_{i,S} for i = 1..n/(3k), nested and of size ik + n/3."""
    n = sigma.n
    third = _block_shape(n, k)
    jmask = ((1 << n) - 1) ^ ((1 << third) - 1)
    S = int(S)
    if S & ~jmask or S.bit_count() != third:
        raise BadBlockStructure(f"S must be a {third}-subset of [{third + 1}, {n}]")
    bits = sigma.bits()
    sel = np.array([(S >> p) & 1 for p in range(n)], dtype=bool)
    tail = np.bitwise_or.reduce(bits[sel]) if third else np.uint64(0)
    prefix = np.bitwise_or.accumulate(bits[:third])
    return prefix[k - 1::k] | tail


def batch_block_hits(family_sorted: np.ndarray, n: int, k: int, seed: int, indices: range) -> np.ndarray:
    """Hit indicator (some C_{i,S} in the family) for each sample index.

    Each sample draws sigma, then S uniformly among n/3-subsets of J, from one
    stream.
    """
    third = n // 3
    sig = np.empty((len(indices), n), dtype=np.int64)
    pick = np.empty((len(indices), third), dtype=np.int64)
    J = np.arange(third, n)
    for row, idx in enumerate(indices):
        rng = sample_rng(seed, idx)
        sig[row] = rng.permutation(n)
        pick[row] = rng.choice(J, size=third, replace=False)
    bits = np.left_shift(np.uint64(1), sig.astype(np.uint64))
    tail = np.bitwise_or.reduce(np.take_along_axis(bits, pick, axis=1), axis=1)
    prefix = np.bitwise_or.accumulate(bits[:, :third], axis=1)[:, k - 1::k]
    C = prefix | tail[:, None]
    return _member(family_sorted, C).any(axis=1)


def hit_density_ceiling(n: int, k: int) -> str:
    """The hit-density ceiling with the Frankl-Furedi constant kept symbolic."""
    return f"d_{2 * k} * {(12 * k * k) ** k} / {n}^{k}"


def block_hit_estimate(
    f0: Family,
    k: int,
    samples: int = 10_000,
    seed: int = 0,
    band_floor: Optional[int] = None,
    threads: int = 1,
) -> BoundEstimate:
    """Estimate the fraction of sets S whose block chain meets ``f0``.

    The analytic sandwich mirrors the single-element case: the union bound
    gives ``L`` (LYM sum over reachable sizes); the first-hit argument, with at
    most C(|D|-1, k-1) removable k-sets per step, gives ``min_i (i0 / i) * L``
    where ``i0`` is the first block index at or above the band floor.
    """
    n = f0.n
    third = _block_shape(n, k)
    counts = layer_counts(f0)
    for s in counts:
        if (s - third) % k or not third + k <= s <= 2 * third:
            raise PreconditionViolated(
                f"set size {s} is not of the form n/3 + ik with 1 <= i <= n/(3k)"
            )
    if not is_valid(f0, ForbiddenDifference(k)):
        raise PreconditionViolated(f"family contains a pair with |A\\B| = {k}")
    if band_floor is None:
        band_floor = min(counts, default=third + k)
    i0 = max(1, -(-(band_floor - third) // k))
    L = sum((Fraction(c, comb(n, s)) for s, c in counts.items()), Fraction(0))
    if any((s - third) // k < i0 for s in counts):
        raise FamilyOutsideBand(f"family has sets below band floor {band_floor}")
    factor = min((Fraction(i0, (s - third) // k) for s in counts), default=Fraction(1))
    fam = np.sort(f0.masks)
    total, total_sq = _moments(
        lambda r: batch_block_hits(fam, n, k, seed, r), samples, threads
    )
    mean, se = _mean_stderr(total, total_sq, samples)
    return BoundEstimate(
        samples=samples,
        mean=mean,
        std_err=se,
        analytic_lower=float(factor * L),
        analytic_upper=float(L),
        L=float(L),
        split={"n": n, "m": third},
        band_floor=band_floor,
        seed=seed,
        ceiling=hit_density_ceiling(n, k),
        extra={"k": k},
    )


# ---------------------------------------------------------------------------


def removable_ksets(D: int, f: Family, k: int) -> list:
    """All k-subsets ``E`` of ``D`` with ``D \\ E`` in ``f``, as masks."""
    D = int(D)
    if D.bit_count() < k:
        raise ValueError(f"|D| = {D.bit_count()} < k = {k}")
    members = [1 << p for p in range(D.bit_length()) if (D >> p) & 1]
    out = []
    for E in combinations(members, k):
        e = sum(E)
        if (D & ~e) in f:
            out.append(e)
    return out
