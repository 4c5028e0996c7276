"""Krippendorff's alpha against a brute-force pairwise oracle."""

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instructlr.agreement import krippendorff_alpha, reliability_matrix
from instructlr.core import AnnotationRecord, ErrorCategory


def oracle_alpha(matrix):
    """Direct pairwise enumeration, no coincidence-matrix shortcut.

    Observed disagreement is the weighted fraction of unequal ordered
    pairs inside each unit; expected disagreement comes from the margin
    counts of all pairable values.
    """
    disagreement = 0.0
    n = 0
    values = []
    for row in matrix:
        present = [v for v in row if v is not None]
        m = len(present)
        if m < 2:
            continue
        n += m
        values.extend(present)
        for i in range(m):
            for j in range(m):
                if i != j and present[i] != present[j]:
                    disagreement += 1.0 / (m - 1)
    if n == 0:
        raise ValueError("no pairable values")
    d_o = disagreement / n
    counts = Counter(values)
    expected = sum(
        counts[c] * counts[k] for c in counts for k in counts if c != k
    )
    d_e = expected / (n * (n - 1))
    if d_e == 0:
        return 1.0
    return 1.0 - d_o / d_e


def random_matrix(rng, items=None, raters=None, categories=None, missing=0.0):
    items = items or rng.randint(1, 30)
    raters = raters or rng.randint(2, 6)
    categories = categories or "abcd"[: rng.randint(2, 4)]
    return [
        [
            None if rng.random() < missing else rng.choice(categories)
            for _ in range(raters)
        ]
        for _ in range(items)
    ]


class TestKnownValues:
    def test_identical_raters_give_one(self):
        matrix = [["a", "a"], ["a", "a"], ["b", "b"], ["b", "b"]]
        assert krippendorff_alpha(matrix) == 1.0

    def test_opposed_raters_give_minus_three_quarters(self):
        matrix = [["a", "b"], ["a", "b"], ["b", "a"], ["b", "a"]]
        alpha = krippendorff_alpha(matrix)
        assert alpha == pytest.approx(-0.75, abs=1e-12)
        assert alpha == pytest.approx(oracle_alpha(matrix), abs=1e-12)

    def test_single_value_everywhere_is_perfect(self):
        # D_e is zero; disagreement is impossible, so agreement is total.
        assert krippendorff_alpha([["a", "a"], ["a", "a"]]) == 1.0

    def test_single_pairable_unit(self):
        assert krippendorff_alpha([["a", "b"]]) == pytest.approx(0.0, abs=1e-12)

    def test_three_raters_with_gaps(self):
        matrix = [
            ["a", "a", None],
            ["b", None, "b"],
            [None, "a", "b"],
            ["a", None, None],  # unpairable, must not contribute
        ]
        assert krippendorff_alpha(matrix) == pytest.approx(
            oracle_alpha(matrix), abs=1e-12
        )

    def test_mixed_value_types_are_fine(self):
        matrix = [[0, 0], [1, 1], [0, 1]]
        assert krippendorff_alpha(matrix) == pytest.approx(
            oracle_alpha(matrix), abs=1e-12
        )


class TestErrors:
    def test_no_pairable_values(self):
        with pytest.raises(ValueError, match="pairable"):
            krippendorff_alpha([["a", None], [None, "b"]])

    def test_empty_matrix(self):
        with pytest.raises(ValueError, match="pairable"):
            krippendorff_alpha([])

    def test_unsupported_metric(self):
        with pytest.raises(ValueError, match="metric"):
            krippendorff_alpha([["a", "b"]], metric="interval")


class TestOracleAgreement:
    def test_200_random_matrices_match_to_1e9(self):
        rng = random.Random(90210)
        checked = 0
        while checked < 200:
            matrix = random_matrix(rng, missing=rng.random() * 0.6)
            try:
                expected = oracle_alpha(matrix)
            except ValueError:
                with pytest.raises(ValueError):
                    krippendorff_alpha(matrix)
                continue
            assert krippendorff_alpha(matrix) == pytest.approx(
                expected, abs=1e-9
            )
            checked += 1

    def test_two_rater_complete_case_matches_pairwise_definition(self):
        rng = random.Random(1137)
        for _ in range(50):
            matrix = random_matrix(rng, raters=2, missing=0.0)
            assert krippendorff_alpha(matrix) == pytest.approx(
                oracle_alpha(matrix), abs=1e-9
            )

    def test_monte_carlo_random_labels_near_zero(self):
        rng = random.Random(20260819)
        matrix = [
            [rng.choice("abc"), rng.choice("abc")] for _ in range(10_000)
        ]
        assert abs(krippendorff_alpha(matrix)) < 0.02


class TestInvariances:
    def test_relabeling_invariance(self):
        rng = random.Random(55)
        matrix = random_matrix(rng, items=25, raters=3, missing=0.2)
        relabel = {"a": "zebra", "b": "yak", "c": "x", "d": "w", None: None}
        relabeled = [[relabel[v] for v in row] for row in matrix]
        assert krippendorff_alpha(relabeled) == pytest.approx(
            krippendorff_alpha(matrix), abs=1e-12
        )

    def test_item_order_invariance(self):
        rng = random.Random(56)
        matrix = random_matrix(rng, items=25, raters=3, missing=0.2)
        baseline = krippendorff_alpha(matrix)
        for _ in range(10):
            shuffled = matrix[:]
            rng.shuffle(shuffled)
            assert krippendorff_alpha(shuffled) == pytest.approx(
                baseline, abs=1e-12
            )

    def test_rater_column_order_invariance(self):
        rng = random.Random(57)
        matrix = random_matrix(rng, items=20, raters=4, missing=0.3)
        try:
            baseline = krippendorff_alpha(matrix)
        except ValueError:
            pytest.skip("degenerate draw")
        permuted = [[row[2], row[0], row[3], row[1]] for row in matrix]
        assert krippendorff_alpha(permuted) == pytest.approx(
            baseline, abs=1e-12
        )

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.lists(
                st.sampled_from(["a", "b", "c", None]),
                min_size=2,
                max_size=4,
            ),
            min_size=1,
            max_size=15,
        )
    )
    def test_alpha_at_most_one_and_matches_oracle(self, matrix):
        try:
            expected = oracle_alpha(matrix)
        except ValueError:
            with pytest.raises(ValueError):
                krippendorff_alpha(matrix)
            return
        alpha = krippendorff_alpha(matrix)
        assert alpha <= 1.0 + 1e-12
        assert alpha == pytest.approx(expected, abs=1e-9)


def rec(draft, annotator, ok):
    return AnnotationRecord(
        draft_id=draft,
        annotator_id=annotator,
        is_correct=ok,
        corrected_response=None if ok else "Suba",
        error_category=None if ok else ErrorCategory.FLUENCY,
    )


class TestReliabilityMatrix:
    def test_layout_sorted_and_gaps_kept(self):
        records = [
            rec("d-2", "bob", False),
            rec("d-1", "alice", True),
            rec("d-1", "bob", True),
        ]
        matrix, drafts, raters = reliability_matrix(records)
        assert drafts == ["d-1", "d-2"]
        assert raters == ["alice", "bob"]
        assert matrix == [["yes", "yes"], [None, "no"]]

    def test_alpha_runs_on_verdict_matrix(self):
        records = []
        for i in range(6):
            ok = i % 2 == 0
            records.append(rec(f"d-{i}", "alice", ok))
            records.append(rec(f"d-{i}", "bob", ok))
        matrix, _, _ = reliability_matrix(records)
        assert krippendorff_alpha(matrix) == 1.0

    def test_duplicate_rating_raises(self):
        records = [rec("d-1", "alice", True), rec("d-1", "alice", True)]
        with pytest.raises(ValueError, match="duplicate"):
            reliability_matrix(records)
