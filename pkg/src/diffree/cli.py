"""Batch command line: ``diffree <command> ...``.

Exit codes: 0 ok, 1 constraint violation or failed property, 2 usage error,
3 internal error.  Relative output paths are resolved under
``$DIFFREE_OUTPUT_DIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import chains, constructions, report, search
from .dsl import parse_spec, render_spec
from .errors import DiffreeError, FamilyOutsideBand, PreconditionViolated
from .family import check_family, dumps_family, elements_of, family_to_json, load_family

OUTPUT_DIR_ENV = "DIFFREE_OUTPUT_DIR"

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    """Everything a command needs; together with the package version it fixes
    every output byte."""

    command: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: str | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        params = {k: v for k, v in vars(args).items() if k not in ("command", "seed", "out", "func")}
        return cls(args.command, getattr(args, "seed", 0), params, getattr(args, "out", None))


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(_resolve(out), "w", newline="") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _residues(text: str):
    if text == "best":
        return "best"
    return tuple(int(x) for x in text.split(","))


# ---------------------------------------------------------------------------


def cmd_construct(cfg: ExperimentConfig) -> int:
    p = cfg.params
    kind = p["kind"]
    if kind == "a-star":
        fam = constructions.a_star(p["n"], _residues(p["residues"]))
    elif kind == "a-star-k":
        fam = constructions.a_star_k(p["n"], p["k"], _residues(p["residues"]))
    elif kind == "middle-layers":
        fam = constructions.middle_layers(p["n"], p["p"], p["q"])
    else:
        fam = constructions.greedy_valid_family(p["n"], parse_spec(p["spec"]), cfg.seed)
        obj = family_to_json(fam)
        obj["seed"] = cfg.seed
        _write(_dump(obj), cfg.out)
        return EXIT_OK
    _write(dumps_family(fam) + "\n", cfg.out)
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig) -> int:
    p = cfg.params
    fam = load_family(p["family"])
    res = check_family(fam, parse_spec(p["spec"]), first_only=not p["all"])
    if res.ok:
        _write("ok\n", cfg.out)
        return EXIT_OK
    lines = [f"violation: {v}" for v in res.violations]
    _write("\n".join(lines) + "\n", cfg.out)
    return EXIT_VIOLATION


def _layer(text: str | None):
    if text is None:
        return None
    if ":" in text:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    return int(text), int(text)


def cmd_search(cfg: ExperimentConfig) -> int:
    p = cfg.params
    spec = parse_spec(p["spec"])
    layer = _layer(p["layer"])
    if p["method"] == "exhaustive":
        res = search.max_family_exhaustive(p["n"], spec, layer)
    else:
        res = search.max_family(p["n"], spec, layer, budget=p["budget"])
    obj = res.to_json()
    obj["spec"] = render_spec(spec)
    _write(_dump(obj), cfg.out)
    return EXIT_OK


def _split(n: int, m: int | None) -> chains.ChainSplit:
    return chains.default_split(n) if m is None else chains.ChainSplit(n, m)


def cmd_sample_chains(cfg: ExperimentConfig) -> int:
    p = cfg.params
    split = _split(p["n"], p["m"])
    sigma = chains.sample_permutation(p["n"], cfg.seed, p["index"])
    C = chains.chains_k1(sigma, split)
    obj = {
        "split": {"n": split.n, "m": split.m},
        "seed": cfg.seed,
        "index": p["index"],
        "sigma": sigma.sigma.tolist(),
        "chains": {
            str(j): [elements_of(int(C[i - 1, j - split.m - 1])) for i in split.I]
            for j in split.J
        },
    }
    if p["family"]:
        fam = load_family(p["family"])
        inc = chains.incidence_k1(fam, sigma, split)
        obj["incidence"] = {
            "sum_x": inc.sum_x,
            "first_hit": list(inc.first_hit) if inc.first_hit else None,
            "hits_by_size": {str(k): v for k, v in sorted(inc.hits_by_size.items())},
        }
    _write(_dump(obj), cfg.out)
    return EXIT_OK


def cmd_estimate(cfg: ExperimentConfig) -> int:
    p = cfg.params
    fam = load_family(p["family"])
    est = chains.estimate_k1(
        fam, _split(fam.n, p["m"]), p["band_floor"], p["samples"], cfg.seed, p["threads"]
    )
    _write(_dump(est.to_json()), cfg.out)
    return EXIT_OK


def cmd_block_estimate(cfg: ExperimentConfig) -> int:
    p = cfg.params
    fam = load_family(p["family"])
    est = chains.block_hit_estimate(
        fam, p["k"], p["samples"], cfg.seed, p["band_floor"], p["threads"]
    )
    _write(_dump(est.to_json()), cfg.out)
    return EXIT_OK


def cmd_report(cfg: ExperimentConfig) -> int:
    p = cfg.params
    rows = report.ratio_table(p["n_max"], p["n_min"], budget=p["budget"])
    _write(report.render_report(rows, p["format"]), cfg.out)
    sizes = {}
    for r in rows:
        sizes.setdefault(r.n, {})[r.label] = r.size
    bad = [n for n, s in sizes.items() if s["search"] < s["a-star"]]
    if bad:
        print(f"search result below a-star size for n in {bad}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="diffree", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        return sp

    sp = add("construct", cmd_construct, "build a lower-bound family")
    sp.add_argument("--kind", required=True, choices=["a-star", "a-star-k", "middle-layers", "greedy"])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--p", type=int, default=0)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--residues", default="best", help="'best' or comma-separated residues")
    sp.add_argument("--spec", default="diff:1", help="rule for --kind greedy")

    sp = add("check", cmd_check, "check a family file against a rule")
    sp.add_argument("family")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--all", action="store_true", help="list every violation")

    sp = add("search", cmd_search, "exact maximum family")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--spec", required=True)
    sp.add_argument("--layer", default=None, help="size s or range lo:hi")
    sp.add_argument("--method", choices=["bnb", "exhaustive"], default="bnb")
    sp.add_argument("--budget", type=int, default=None, help="node limit")

    sp = add("sample-chains", cmd_sample_chains, "show the partial chains of one permutation")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--index", type=int, default=0)
    sp.add_argument("--family", default=None)

    sp = add("estimate", cmd_estimate, "Monte-Carlo estimate of the chain incidence sum")
    sp.add_argument("--family", required=True)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--band-floor", type=int, default=None)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--threads", type=int, default=1)

    sp = add("block-estimate", cmd_block_estimate, "Monte-Carlo block-chain hit density")
    sp.add_argument("--family", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--band-floor", type=int, default=None)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--threads", type=int, default=1)

    sp = add("report", cmd_report, "emit a size/ratio table")
    sp.add_argument("--table", choices=["ratios"], default="ratios")
    sp.add_argument("--n-min", type=int, default=1)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--budget", type=int, default=50_000)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    return ap


def run(cfg: ExperimentConfig) -> int:
    handlers = {
        "construct": cmd_construct,
        "check": cmd_check,
        "search": cmd_search,
        "sample-chains": cmd_sample_chains,
        "estimate": cmd_estimate,
        "block-estimate": cmd_block_estimate,
        "report": cmd_report,
    }
    return handlers[cfg.command](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExperimentConfig.from_args(args)
    try:
        return run(cfg)
    except (PreconditionViolated, FamilyOutsideBand) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (DiffreeError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
