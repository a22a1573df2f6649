import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from diffree import cli
from diffree.constraints import (
    ForbiddenDifference,
    ForbiddenIntersection,
    ForbiddenRatio,
    ForbiddenSymmetricDifference,
)
from diffree.dsl import parse_spec, render_spec
from diffree.errors import ParseError
from diffree.family import family_from_json
from diffree.report import HEADER, ReportRow, emit_report, render_report


class TestDsl:
    def test_examples(self):
        assert parse_spec("diff:1") == ForbiddenDifference(1)
        assert parse_spec("ratio:1:2") == ForbiddenRatio(1, 2)
        assert parse_spec("symdiff:2") == ForbiddenSymmetricDifference(2)
        assert parse_spec("meet:0") == ForbiddenIntersection(0)

    def test_conjunction(self):
        assert parse_spec("diff:1,meet:0") == [ForbiddenDifference(1), ForbiddenIntersection(0)]

    @pytest.mark.parametrize(
        "text,pos",
        [("ratio:2:4", 6), ("foo:1", 0), ("diff:x", 5), ("diff:0", 5), ("diff:1,", 7),
         ("", 0), ("ratio:3:2", 6), ("diff:1:2", 0), ("diff:1,symdiff:-1", 15)],
    )
    def test_errors(self, text, pos):
        with pytest.raises(ParseError) as exc:
            parse_spec(text)
        assert exc.value.position == pos

    specs = st.one_of(
        st.builds(ForbiddenDifference, st.integers(1, 50)),
        st.builds(ForbiddenSymmetricDifference, st.integers(1, 50)),
        st.builds(ForbiddenIntersection, st.integers(0, 50)),
        st.tuples(st.integers(0, 30), st.integers(1, 30))
        .filter(lambda pq: pq[0] <= pq[1] and __import__("math").gcd(*pq) == 1)
        .map(lambda pq: ForbiddenRatio(*pq)),
    )

    @given(specs)
    def test_round_trip(self, spec):
        assert parse_spec(render_spec(spec)) == spec
        assert render_spec(parse_spec(render_spec(spec))) == render_spec(spec)

    @given(st.lists(specs, min_size=2, max_size=4))
    def test_round_trip_conjunction(self, specs):
        assert parse_spec(render_spec(specs)) == specs


class TestReport:
    def test_single_row(self, tmp_path):
        rows = [ReportRow(4, "diff:1", "a-star", 2)]
        path = tmp_path / "r.csv"
        emit_report(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,spec,label,size,central_binomial,normalized_ratio,extra"
        assert lines[1:] == ["4,diff:1,a-star,2,6,1.33333,"]

    def test_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path / "r.csv")

    def test_sorted_and_json(self):
        rows = [
            ReportRow(5, "diff:1", "search", 4, {"proven": "true"}),
            ReportRow(4, "diff:1", "search", 4),
            ReportRow(5, "diff:1", "a-star", 2),
        ]
        body = list(csv.reader(io.StringIO(render_report(rows))))
        assert body[0] == HEADER
        assert [(r[0], r[2]) for r in body[1:]] == [("4", "search"), ("5", "a-star"), ("5", "search")]
        assert body[3][6] == "proven=true"
        js = json.loads(render_report(rows, "json"))
        assert [(r["n"], r["label"]) for r in js] == [(4, "search"), (5, "a-star"), (5, "search")]

    def test_ratio_recomputable(self):
        r = ReportRow(11, "diff:2", "a-star-k", 5)
        assert r.normalized_ratio == pytest.approx(r.size * 11 ** 2 / r.central_binomial)


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_construct_and_check(self, tmp_path, capsys):
        fam = tmp_path / "fam.json"
        code, _, _ = run_cli(["construct", "--kind", "a-star", "--n", "12", "--out", str(fam)], capsys)
        assert code == 0
        f = family_from_json(json.loads(fam.read_text()))
        assert len(f) == 80
        code, out, _ = run_cli(["check", str(fam), "--spec", "diff:1"], capsys)
        assert code == 0 and out.strip() == "ok"
        code, out, _ = run_cli(["check", str(fam), "--spec", "diff:2"], capsys)
        assert code == 1 and out.startswith("violation:") and len(out.splitlines()) == 1

    def test_construct_kinds(self, capsys):
        code, out, _ = run_cli(["construct", "--kind", "a-star", "--n", "4"], capsys)
        assert json.loads(out) == {"n": 4, "sets": [[2, 3], [1, 4]]}
        code, out, _ = run_cli(["construct", "--kind", "a-star-k", "--n", "7", "--k", "1", "--residues", "0"], capsys)
        assert len(json.loads(out)["sets"]) == 5
        code, out, _ = run_cli(["construct", "--kind", "middle-layers", "--n", "5", "--p", "1", "--q", "3"], capsys)
        assert len(json.loads(out)["sets"]) == 20
        code, out, _ = run_cli(["construct", "--kind", "greedy", "--n", "6", "--seed", "4"], capsys)
        assert json.loads(out)["seed"] == 4

    def test_search_exhaustive(self, capsys):
        code, out, _ = run_cli(["search", "--n", "4", "--spec", "diff:1", "--method", "exhaustive"], capsys)
        obj = json.loads(out)
        assert code == 0 and obj["optimum"] == 4 and obj["proven_optimal"] is True
        assert set(obj) >= {"optimum", "witness", "nodes_explored", "proven_optimal"}

    def test_search_layer(self, capsys):
        code, out, _ = run_cli(["search", "--n", "6", "--spec", "meet:0", "--layer", "3"], capsys)
        assert json.loads(out)["optimum"] == 10

    def test_usage_errors(self, capsys):
        code, _, err = run_cli(["search", "--n", "4", "--spec", "ratio:2:4"], capsys)
        assert code == 2 and "lowest terms" in err
        with pytest.raises(SystemExit) as exc:
            cli.main(["nonsense"])
        assert exc.value.code == 2
        code, _, _ = run_cli(["construct", "--kind", "a-star-k", "--n", "9"], capsys)
        assert code == 2

    def test_estimate_reproducible(self, tmp_path, capsys):
        fam = tmp_path / "f.json"
        run_cli(["construct", "--kind", "a-star", "--n", "12", "--out", str(fam)], capsys)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["estimate", "--family", str(fam), "--band-floor", "6", "--samples", "5000", "--seed", "3"]
        assert run_cli(args + ["--out", str(a)], capsys)[0] == 0
        assert run_cli(args + ["--out", str(b), "--threads", "2"], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        obj = json.loads(a.read_text())
        assert obj["seed"] == 3 and obj["split"] == {"n": 12, "m": 11} and obj["band_floor"] == 6

    def test_estimate_precondition_exit(self, tmp_path, capsys):
        fam = tmp_path / "bad.json"
        fam.write_text(json.dumps({"n": 12, "sets": [[1, 2, 3], [1, 2, 3, 4]]}))
        code, _, _ = run_cli(["estimate", "--family", str(fam), "--band-floor", "3"], capsys)
        assert code == 1

    def test_block_estimate(self, tmp_path, capsys):
        fam = tmp_path / "f.json"
        fam.write_text(json.dumps({"n": 6, "sets": [[1, 2, 3, 4]]}))
        code, out, _ = run_cli(["block-estimate", "--family", str(fam), "--k", "2", "--samples", "2000"], capsys)
        obj = json.loads(out)
        assert code == 0 and obj["ceiling"] == "d_4 * 2304 / 6^2"

    def test_sample_chains(self, tmp_path, capsys):
        fam = tmp_path / "f.json"
        fam.write_text(json.dumps({"n": 10, "sets": [[1, 10]]}))
        code, out, _ = run_cli(["sample-chains", "--n", "10", "--index", "2", "--family", str(fam)], capsys)
        obj = json.loads(out)
        assert code == 0 and obj["split"] == {"n": 10, "m": 9}
        assert len(obj["chains"]["10"]) == 9
        assert obj["incidence"]["sum_x"] in (0, 1)

    def test_output_dir_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "outdir"))
        code, _, _ = run_cli(["construct", "--kind", "a-star", "--n", "6", "--out", "x.json"], capsys)
        assert code == 0 and (tmp_path / "outdir" / "x.json").exists()

    def test_report_small(self, capsys):
        code, out, _ = run_cli(["report", "--table", "ratios", "--n-max", "5"], capsys)
        lines = out.splitlines()
        assert code == 0 and lines[0] == ",".join(HEADER) and len(lines) == 11
        assert "4,diff:1,a-star,2,6,1.33333," in lines
