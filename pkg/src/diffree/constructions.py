"""Lower-bound families: residue-class layers, middle layers, greedy fill."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Union

import numpy as np

from .constraints import SpecLike, as_rules, pair_forbidden
from .errors import NotPrime, UniverseTooLarge
from .family import Family, layer_masks


@dataclass(frozen=True)
class ResidueChoice:
    """Which residue vector selects the layer subfamily.

    ``residues`` is either a tuple ``(r_1, ..., r_k)`` or the string ``"best"``
    (largest class; ties go to the lexicographically smallest vector).
    """

    residues: Union[tuple, str] = "best"

    @classmethod
    def best(cls):
        return cls("best")

    @classmethod
    def zero(cls, k: int = 1):
        return cls((0,) * k)

    @property
    def is_best(self) -> bool:
        return isinstance(self.residues, str)


def _as_choice(choice) -> ResidueChoice:
    if isinstance(choice, ResidueChoice):
        return choice
    if choice == "best":
        return ResidueChoice.best()
    if isinstance(choice, int):
        return ResidueChoice((choice,))
    return ResidueChoice(tuple(choice))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def power_sum_residues(masks: np.ndarray, n: int, k: int) -> np.ndarray:
    """Column ``d-1`` holds ``sum_{i in A} i^d mod n`` for each mask ``A``.

    Elements are reduced mod ``n`` before powering, so element ``n`` adds 0.
    """
    out = np.zeros((len(masks), k), dtype=np.int64)
    for i in range(1, n + 1):
        has = ((masks >> np.uint64(i - 1)) & np.uint64(1)).astype(np.int64)
        for d in range(1, k + 1):
            out[:, d - 1] += has * pow(i % n, d, n)
    return out % n


def _residue_family(n: int, k: int, choice) -> tuple:
    """Members of layer floor(n/2) whose power-sum vector matches ``choice``.

    Returns ``(family, residue_vector)``.
    """
    choice = _as_choice(choice)
    layer = layer_masks(n, n // 2)
    res = power_sum_residues(layer, n, k)
    # single integer code per vector, lexicographic order preserved
    code = np.zeros(len(layer), dtype=np.int64)
    for d in range(k):
        code = code * n + res[:, d]
    if choice.is_best:
        counts = np.bincount(code, minlength=n ** k)
        target = int(np.argmax(counts))  # argmax returns the first maximum
    else:
        vec = tuple(int(r) for r in choice.residues)
        if len(vec) != k or any(not 0 <= r < n for r in vec):
            raise ValueError(f"residue vector {vec} invalid for n={n}, k={k}")
        target = 0
        for r in vec:
            target = target * n + r
    vector = []
    t = target
    for _ in range(k):
        vector.append(t % n)
        t //= n
    return Family(n, tuple(layer[code == target].tolist())), tuple(reversed(vector))


def a_star(n: int, choice="best") -> Family:
    """Sets of size floor(n/2) whose element sum is a fixed residue mod n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _residue_family(n, 1, choice)[0]


def a_star_with_residue(n: int, choice="best") -> tuple:
    return _residue_family(n, 1, choice)


def a_star_k(n: int, k: int, choice="best") -> Family:
    """Sets of size floor(n/2) with prescribed power sums of degrees 1..k mod prime n."""
    if not is_prime(n):
        raise NotPrime(f"{n} is not prime")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    return _residue_family(n, k, choice)[0]


def a_star_k_with_residues(n: int, k: int, choice="best") -> tuple:
    if not is_prime(n):
        raise NotPrime(f"{n} is not prime")
    return _residue_family(n, k, choice)


def residue_class_sizes(n: int, k: int = 1) -> dict:
    """Size of every residue class in layer floor(n/2), keyed by residue vector."""
    layer = layer_masks(n, n // 2)
    res = power_sum_residues(layer, n, k)
    out = {vec: 0 for vec in product(range(n), repeat=k)}
    vecs, counts = np.unique(res, axis=0, return_counts=True)
    for v, c in zip(vecs, counts):
        out[tuple(int(x) for x in v)] = int(c)
    return out


def middle_layers(n: int, p: int, q: int) -> Family:
    """The ``q - p`` consecutive layers centred on n/2."""
    width = q - p
    if width < 1 or width > n + 1:
        raise ValueError(f"need 1 <= q - p <= n + 1, got {width}")
    t = (n - (width - 1)) // 2
    masks = []
    for s in range(t, t + width):
        masks.extend(layer_masks(n, s).tolist())
    return Family(n, tuple(masks))


def greedy_valid_family(n: int, spec: SpecLike, seed: int = 0, max_n: int = 20) -> Family:
    """Scan all subsets of [n] in seeded random order, keeping each set that
    conflicts with nothing already kept."""
    if n > max_n:
        raise UniverseTooLarge(f"n={n} exceeds greedy cap {max_n}")
    rules = as_rules(spec)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1)])))
    order = rng.permutation(1 << n).astype(np.uint64)
    chosen = np.zeros(1 << n, dtype=np.uint64)
    size = 0
    for v in order:
        kept = chosen[:size]
        if size:
            ab = np.bitwise_count(v & ~kept).astype(np.int64)
            ba = np.bitwise_count(kept & ~v).astype(np.int64)
            meet = np.bitwise_count(v & kept).astype(np.int64)
            if np.any(pair_forbidden(rules, ab, ba, meet)):
                continue
        chosen[size] = v
        size += 1
    return Family(n, tuple(chosen[:size].tolist()))
