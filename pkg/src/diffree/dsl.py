"""Text form of constraint rules: ``diff:k``, ``ratio:p:q``, ``symdiff:d``, ``meet:k``.

Terms are comma-joined for conjunctions, e.g. ``diff:1,symdiff:2``.
"""

from __future__ import annotations

import re
from math import gcd

from .constraints import (
    ForbiddenDifference,
    ForbiddenIntersection,
    ForbiddenRatio,
    ForbiddenSymmetricDifference,
    SpecLike,
    render_rules,
)
from .errors import ParseError

_ARITY = {"diff": 1, "ratio": 2, "symdiff": 1, "meet": 1}
_INT = re.compile(r"\d+")


def _parse_term(term: str, offset: int):
    parts = term.split(":")
    tag = parts[0]
    if tag not in _ARITY:
        raise ParseError(f"unknown rule tag {tag!r}", offset)
    args = parts[1:]
    if len(args) != _ARITY[tag]:
        raise ParseError(f"{tag} takes {_ARITY[tag]} integer argument(s)", offset)
    values = []
    pos = offset + len(tag) + 1
    for a in args:
        if not _INT.fullmatch(a):
            raise ParseError(f"expected a non-negative integer, got {a!r}", pos)
        values.append(int(a))
        pos += len(a) + 1
    arg_pos = offset + len(tag) + 1
    if tag == "diff":
        if values[0] < 1:
            raise ParseError("diff needs k >= 1", arg_pos)
        return ForbiddenDifference(values[0])
    if tag == "symdiff":
        if values[0] < 1:
            raise ParseError("symdiff needs d >= 1", arg_pos)
        return ForbiddenSymmetricDifference(values[0])
    if tag == "meet":
        return ForbiddenIntersection(values[0])
    p, q = values
    if q < 1 or q < p:
        raise ParseError("ratio needs q >= 1 and q >= p", arg_pos)
    if gcd(p, q) != 1:
        raise ParseError(f"ratio {p}:{q} is not in lowest terms", arg_pos)
    return ForbiddenRatio(p, q)


def parse_spec(text: str) -> SpecLike:
    """Parse rule text; a single term gives one rule, several give a list.

    >>> parse_spec("ratio:1:2")
    ForbiddenRatio(p=1, q=2)
    """
    if not text:
        raise ParseError("empty rule text", 0)
    rules = []
    offset = 0
    for term in text.split(","):
        if not term:
            raise ParseError("empty term", offset)
        rules.append(_parse_term(term, offset))
        offset += len(term) + 1
    return rules[0] if len(rules) == 1 else rules


def render_spec(spec: SpecLike) -> str:
    return render_rules(spec)
