"""Forbidden-configuration rules on pairs of sets.

Every rule is a predicate on the ordered pair statistics
``(|A\\B|, |B\\A|, |A&B|)`` of two *distinct* sets.  The predicates are written
with plain arithmetic so they evaluate equally on Python ints and on numpy
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence, Union


@dataclass(frozen=True)
class ForbiddenDifference:
    """Forbid ordered distinct pairs with ``|A \\ B| == k``."""

    k: int

    symmetric = False

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError(f"ForbiddenDifference needs k >= 1, got {self.k}")

    def forbids(self, ab, ba, meet):
        return ab == self.k

    def render(self) -> str:
        return f"diff:{self.k}"


@dataclass(frozen=True)
class ForbiddenRatio:
    """Forbid distinct pairs with ``q*|A \\ B| == p*|B \\ A|`` (tilted Sperner)."""

    p: int
    q: int

    symmetric = False

    def __post_init__(self):
        if self.p < 0 or self.q < 1 or self.q < self.p:
            raise ValueError(f"ForbiddenRatio needs 0 <= p <= q, q >= 1; got {self.p}:{self.q}")
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"ForbiddenRatio needs coprime p, q; got {self.p}:{self.q}")

    def forbids(self, ab, ba, meet):
        return self.q * ab == self.p * ba

    def render(self) -> str:
        return f"ratio:{self.p}:{self.q}"


@dataclass(frozen=True)
class ForbiddenSymmetricDifference:
    """Forbid distinct pairs at Hamming distance ``d``."""

    d: int

    symmetric = True

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"ForbiddenSymmetricDifference needs d >= 1, got {self.d}")

    def forbids(self, ab, ba, meet):
        return ab + ba == self.d

    def render(self) -> str:
        return f"symdiff:{self.d}"


@dataclass(frozen=True)
class ForbiddenIntersection:
    """Forbid distinct pairs meeting in exactly ``k`` elements."""

    k: int

    symmetric = True

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"ForbiddenIntersection needs k >= 0, got {self.k}")

    def forbids(self, ab, ba, meet):
        return meet == self.k

    def render(self) -> str:
        return f"meet:{self.k}"


ConstraintSpec = Union[
    ForbiddenDifference, ForbiddenRatio, ForbiddenSymmetricDifference, ForbiddenIntersection
]
SpecLike = Union[ConstraintSpec, Sequence[ConstraintSpec]]

SPEC_TYPES = (
    ForbiddenDifference,
    ForbiddenRatio,
    ForbiddenSymmetricDifference,
    ForbiddenIntersection,
)


def as_rules(spec: SpecLike) -> tuple:
    """Normalize a single rule or a conjunction of rules to a tuple of rules."""
    if isinstance(spec, SPEC_TYPES):
        return (spec,)
    rules = tuple(spec)
    if not rules:
        raise ValueError("empty conjunction of rules")
    for r in rules:
        if not isinstance(r, SPEC_TYPES):
            raise TypeError(f"not a constraint rule: {r!r}")
    return rules


def render_rules(spec: SpecLike) -> str:
    return ",".join(r.render() for r in as_rules(spec))


def pair_forbidden(rules: Iterable[ConstraintSpec], ab, ba, meet):
    """True where the unordered pair violates any rule in either order."""
    out = False
    for r in rules:
        out = out | r.forbids(ab, ba, meet) | r.forbids(ba, ab, meet)
    return out


def forbidden_offsets(rule: ConstraintSpec, n: int, s: int, t: int) -> list:
    """Values ``a = |A\\B|`` that ``rule`` forbids for ordered pairs with |A|=s, |B|=t.

    Given the sizes, ``|B\\A| = a + t - s`` and ``|A&B| = s - a``.  The identical
    pair (a == 0 and s == t) is never listed.
    """
    out = []
    for a in range(max(0, s - t), s + 1):
        b = a + t - s
        if b > n - s:
            break
        if a == 0 and b == 0:
            continue
        if rule.forbids(a, b, s - a):
            out.append(a)
    return out
