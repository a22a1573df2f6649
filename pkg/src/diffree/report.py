"""Tabular reports comparing family sizes with the central binomial coefficient."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import comb
from typing import Optional

from .constraints import ForbiddenDifference, as_rules
from .constructions import a_star
from .dsl import parse_spec, render_spec
from .search import max_family

HEADER = ["n", "spec", "label", "size", "central_binomial", "normalized_ratio", "extra"]


def _spec_exponent(spec_text: str) -> int:
    """Power of n used to normalize sizes: k for a lone ``diff:k``, else 0."""
    rules = as_rules(parse_spec(spec_text))
    if len(rules) == 1 and isinstance(rules[0], ForbiddenDifference):
        return rules[0].k
    return 0


@dataclass(frozen=True)
class ReportRow:
    n: int
    spec: str
    label: str
    size: int
    extra: dict = field(default_factory=dict)

    @property
    def central_binomial(self) -> int:
        return comb(self.n, self.n // 2)

    @property
    def normalized_ratio(self) -> float:
        k = _spec_exponent(self.spec)
        return self.size * self.n ** k / self.central_binomial

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "spec": self.spec,
            "label": self.label,
            "size": self.size,
            "central_binomial": self.central_binomial,
            "normalized_ratio": float(f"{self.normalized_ratio:.6g}"),
            "extra": self.extra,
        }


def _extra_text(extra: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in extra.items())


def render_report(rows, fmt: str = "csv") -> str:
    if not rows:
        raise ValueError("report needs at least one row")
    rows = sorted(rows, key=lambda r: (r.n, r.label))
    if fmt == "json":
        return json.dumps([r.as_dict() for r in rows], indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([
            r.n, r.spec, r.label, r.size, r.central_binomial,
            f"{r.normalized_ratio:.6g}", _extra_text(r.extra),
        ])
    return buf.getvalue()


def emit_report(rows, path, fmt: str = "csv") -> None:
    text = render_report(rows, fmt)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def ratio_table(n_max: int, n_min: int = 1, budget: Optional[int] = 200_000) -> list:
    """Rows for |a_star(n)| and the best diff:1 family found by search.

    The search starts from a_star(n) as incumbent, so its size never falls
    below the construction; ``proven`` in ``extra`` says whether it is exact.
    """
    spec = ForbiddenDifference(1)
    text = render_spec(spec)
    rows = []
    for n in range(n_min, n_max + 1):
        construction = a_star(n)
        rows.append(ReportRow(n, text, "a-star", len(construction)))
        res = max_family(n, spec, budget=budget, initial=construction.sets)
        rows.append(ReportRow(
            n, text, "search", res.optimum,
            {"proven": str(res.proven_optimal).lower(), "nodes": res.nodes_explored},
        ))
    return rows
