import json
import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffree.constraints import (
    ForbiddenDifference,
    ForbiddenIntersection,
    ForbiddenRatio,
    ForbiddenSymmetricDifference,
)
from diffree.constructions import a_star
from diffree.errors import DuplicateSet, ElementOutOfRange, UniverseTooLarge
from diffree.family import (
    Family,
    check_family,
    conflict_graph,
    default_band,
    elements_of,
    family_from_json,
    family_to_json,
    is_valid,
    layer_masks,
    lym_sum,
    make_family,
    mask_from_elements,
    pair_stats,
    partition_by_size_mod,
    size_in_band,
    truncate_to_band,
)

import oracles

RULES = [
    ("diff", (1,), ForbiddenDifference(1)),
    ("diff", (2,), ForbiddenDifference(2)),
    ("ratio", (0, 1), ForbiddenRatio(0, 1)),
    ("ratio", (1, 2), ForbiddenRatio(1, 2)),
    ("symdiff", (2,), ForbiddenSymmetricDifference(2)),
    ("meet", (0,), ForbiddenIntersection(0)),
    ("meet", (1,), ForbiddenIntersection(1)),
]


def to_frozensets(f):
    return [frozenset(elements_of(m)) for m in f.sets]


class TestMakeFamily:
    def test_direct_encoding(self):
        f = make_family(4, [[1, 4], [2, 3]])
        assert f.n == 4
        assert f.sets == (0b1001, 0b0110)

    def test_empty(self):
        f = make_family(3, [])
        assert len(f) == 0

    def test_duplicate_rejected(self):
        with pytest.raises(DuplicateSet):
            make_family(2, [[1], [1]])

    def test_out_of_range(self):
        with pytest.raises(ElementOutOfRange):
            make_family(3, [[4]])
        with pytest.raises(ElementOutOfRange):
            make_family(3, [[0]])
        with pytest.raises(ElementOutOfRange):
            make_family(3, [8])

    def test_universe_cap(self):
        with pytest.raises(UniverseTooLarge):
            make_family(64, [])
        assert make_family(63, [[63]]).sets == (1 << 62,)

    def test_masks_and_lists_mix(self):
        assert make_family(3, [5, [2]]).sets == (5, 2)


class TestPairStats:
    def test_examples(self):
        assert pair_stats(mask_from_elements([1, 2], 3), mask_from_elements([2, 3], 3)) == (1, 1, 1, 2)
        assert pair_stats(0, mask_from_elements([1, 2, 3], 3)) == (0, 3, 0, 3)
        x = mask_from_elements([1, 3, 5], 5)
        assert pair_stats(x, x) == (0, 0, 3, 0)

    def test_identities_exhaustive(self):
        n = 8  # every pair of masks
        for a in range(1 << n):
            for b in range(0, 1 << n, 7):
                ab, ba, meet, sd = pair_stats(a, b)
                assert ab + meet == a.bit_count()
                assert ab + ba == sd
                assert ba + meet == b.bit_count()

    @given(st.integers(0, (1 << 12) - 1), st.integers(0, (1 << 12) - 1))
    def test_identities_n12(self, a, b):
        ab, ba, meet, sd = pair_stats(a, b)
        assert ab + meet == a.bit_count() and ab + ba == sd


class TestCheckFamily:
    def test_examples(self):
        assert check_family(make_family(2, [[], [1, 2]]), ForbiddenDifference(1)).ok
        res = check_family(make_family(2, [[1], [1, 2]]), ForbiddenDifference(1))
        assert not res.ok
        assert [(v.a, v.b) for v in res.violations] == [(0b11, 0b01)]

    def test_a_star_6(self):
        f = a_star(6)
        assert check_family(f, ForbiddenDifference(1)).ok
        assert oracles.family_ok("diff", (1,), to_frozensets(f))

    @pytest.mark.parametrize("tag,params,rule", RULES)
    def test_against_pairwise_oracle(self, tag, params, rule):
        rng = random.Random(f"{tag}{params}")
        for _ in range(60):
            n = rng.randint(1, 8)
            pool = list(range(1 << n))
            f = Family(n, tuple(rng.sample(pool, rng.randint(0, min(12, len(pool))))))
            sets = to_frozensets(f)
            expected = {
                (A, B)
                for A in sets for B in sets
                if A != B and oracles.violates(tag, params, A, B)
            }
            got = check_family(f, rule)
            assert got.ok == (not expected)
            for v in got.violations:
                A, B = frozenset(elements_of(v.a)), frozenset(elements_of(v.b))
                assert (A, B) in expected
            # every offending unordered pair is reported at least once
            reported = {frozenset({v.a, v.b}) for v in got.violations}
            want = {frozenset({mask_from_elements(A, n), mask_from_elements(B, n)}) for A, B in expected}
            assert reported == want

    def test_neighbour_path_matches_pairwise(self):
        # a large single layer forces the local-edit search
        n = 14
        layer = layer_masks(n, 7)
        rng = np.random.default_rng(3)
        pick = rng.choice(layer, size=1500, replace=False)
        f = Family(n, tuple(int(x) for x in pick))
        fast = check_family(f, ForbiddenDifference(1)).violations
        A = f.masks
        ab = np.bitwise_count(A[:, None] & ~A[None, :])
        brute = {(int(A[i]), int(A[j])) for i, j in zip(*np.nonzero(ab == 1))}
        assert {(v.a, v.b) for v in fast} == brute

    def test_first_only(self):
        f = make_family(3, [[1], [1, 2], [1, 3], [1, 2, 3]])
        assert len(check_family(f, ForbiddenDifference(1), first_only=True).violations) == 1
        assert len(check_family(f, ForbiddenDifference(1)).violations) > 1

    def test_conjunction(self):
        f = make_family(3, [[], [1, 2]])
        assert check_family(f, [ForbiddenDifference(1)]).ok
        res = check_family(f, [ForbiddenDifference(1), ForbiddenSymmetricDifference(2)])
        assert [v.rule for v in res.violations] == [ForbiddenSymmetricDifference(2)]

    @settings(max_examples=50, deadline=None)
    @given(st.data())
    def test_order_independent(self, data):
        n = data.draw(st.integers(1, 7))
        sets = data.draw(st.lists(st.integers(0, (1 << n) - 1), unique=True, max_size=15))
        perm = data.draw(st.permutations(sets))
        for _, _, rule in RULES:
            assert check_family(Family(n, sets), rule) == check_family(Family(n, perm), rule)


class TestConflictGraph:
    def test_n1(self):
        g = conflict_graph(1, ForbiddenDifference(1))
        assert len(g) == 2 and g.edge_count == 1
        assert list(g.edges()) == [(0, 1)]

    def test_n2_diff1(self):
        g = conflict_graph(2, ForbiddenDifference(1))
        assert len(g) == 4 and g.edge_count == 5
        assert (0, 3) not in set(g.edges())

    def test_n2_symdiff2(self):
        g = conflict_graph(2, ForbiddenSymmetricDifference(2))
        assert sorted(g.edges()) == [(0, 3), (1, 2)]

    def test_symmetric_loop_free(self):
        g = conflict_graph(5, ForbiddenRatio(1, 2))
        for i, row in enumerate(g.adjacency):
            assert not (row >> i) & 1
            for j in range(len(g)):
                assert ((row >> j) & 1) == ((g.adjacency[j] >> i) & 1)

    def test_edges_match_oracle(self):
        for tag, params, rule in RULES:
            g = conflict_graph(4, rule)
            want = {
                (mask_from_elements(A, 4), mask_from_elements(B, 4))
                for A, B in combinations(oracles.subsets(4), 2)
                if oracles.violates(tag, params, A, B)
            }
            got = {tuple(sorted(e)) for e in g.edges()}
            assert got == {tuple(sorted(e)) for e in want}

    def test_layer_range(self):
        g = conflict_graph(5, ForbiddenIntersection(0), (2, 2))
        assert len(g) == 10 and g.edge_count == 15  # Petersen graph

    def test_cap(self):
        with pytest.raises(UniverseTooLarge):
            conflict_graph(21, ForbiddenDifference(1))

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_valid_iff_independent(self, data):
        n = data.draw(st.integers(1, 8))
        sets = data.draw(st.lists(st.integers(0, (1 << n) - 1), unique=True, max_size=10))
        _, _, rule = data.draw(st.sampled_from(RULES))
        g = conflict_graph(n, rule)
        assert is_valid(Family(n, sets), rule) == g.is_independent(sets)


class TestBandAndLym:
    def test_default_band_n100(self):
        lo, hi = default_band(100)
        assert lo == pytest.approx(28.456, abs=1e-3) and hi == pytest.approx(71.544, abs=1e-3)

    def test_band_n100(self):
        assert not size_in_band(100, 20)
        assert size_in_band(100, 50)
        assert size_in_band(100, 29) and not size_in_band(100, 28)
        assert size_in_band(100, 71) and not size_in_band(100, 72)

    def test_exact_matches_float_band(self):
        for n in range(1, 200):
            lo, hi = default_band(n)
            for s in range(n + 1):
                if min(abs(s - lo), abs(s - hi)) > 1e-9:
                    assert size_in_band(n, s) == (lo <= s <= hi)

    def test_truncate(self):
        f = make_family(40, [list(range(1, 5)), list(range(1, 21))])
        kept, removed = truncate_to_band(f)  # band [8.30, 31.70]
        assert kept.sets == (f.sets[1],) and removed == 1

    def test_truncate_identity(self):
        f = a_star(10)
        kept, removed = truncate_to_band(f)
        assert kept == f and removed == 0

    def test_truncate_explicit_band_inclusive(self):
        f = make_family(6, [[1], [1, 2], [1, 2, 3]])
        kept, removed = truncate_to_band(f, (2, 3))
        assert len(kept) == 2 and removed == 1

    def test_lym(self):
        assert lym_sum(Family(5, tuple(int(x) for x in layer_masks(5, 2)))) == 1
        assert lym_sum(make_family(4, [[]])) == 1
        assert lym_sum(a_star(4)) == Fraction(1, 3)
        assert lym_sum(make_family(4, [])) == 0

    def test_lym_exact_large_n(self):
        f = make_family(60, [list(range(1, 31))])
        from math import comb
        assert lym_sum(f) == Fraction(1, comb(60, 30))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 14), st.integers(0, 2**32 - 1))
    def test_lym_antichain(self, n, seed):
        rng = random.Random(seed)
        chosen = []
        for m in rng.sample(range(1 << n), min(1 << n, 200)):
            if all((m & c) != m and (m & c) != c for c in chosen):
                chosen.append(m)
        f = Family(n, tuple(chosen))
        assert check_family(f, ForbiddenRatio(0, 1)).ok
        assert lym_sum(f) <= 1


class TestPartition:
    def test_identity_k1(self):
        f = a_star(8)
        assert partition_by_size_mod(f, 1) == [f]

    def test_example(self):
        f = make_family(2, [[], [1], [1, 2]])
        b0, b1 = partition_by_size_mod(f, 2)
        assert set(b0.sets) == {0, 3} and b1.sets == (1,)

    @given(st.integers(1, 6), st.lists(st.integers(0, 255), unique=True))
    def test_partitions_exactly(self, k, sets):
        f = Family(8, tuple(sets))
        parts = partition_by_size_mod(f, k)
        assert sorted(m for p in parts for m in p.sets) == sorted(sets)
        for l, p in enumerate(parts):
            assert all(m.bit_count() % k == l for m in p.sets)


class TestJson:
    def test_canonical_writer(self):
        f = make_family(6, [[1, 2, 3], [2, 3], [1, 4]])
        assert family_to_json(f) == {"n": 6, "sets": [[2, 3], [1, 4], [1, 2, 3]]}

    def test_mask_form(self):
        assert family_from_json({"n": 6, "masks": [9, 6]}) == make_family(6, [[1, 4], [2, 3]])

    def test_round_trip(self):
        f = a_star(9)
        back = family_from_json(json.loads(json.dumps(family_to_json(f))))
        assert set(back.sets) == set(f.sets)

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            family_from_json({"n": 4, "sets": [[2, 1]]})
