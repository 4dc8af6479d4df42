import numpy as np
import pytest

from eppscore import (
    PairedSplitsMismatchError,
    PairingMode,
    PairwiseCounts,
    TiePolicy,
    UndefinedWinRateError,
    build_matches,
    empirical_win_rate,
    parse_scores_csv,
)
from oracles import naive_pairwise_counts


def table_from_matrix(scores_by_model, dataset="d1", splits=None):
    """scores_by_model: {model: [scores]}; splits default s00, s01, ..."""
    lines = ["dataset,model,algorithm,split,score"]
    for model, scores in scores_by_model.items():
        ids = splits or [f"s{k:02d}" for k in range(len(scores))]
        for split, score in zip(ids, scores):
            lines.append(f"{dataset},{model},alg,{split},{float(score)!r}")
    return parse_scores_csv("\n".join(lines) + "\n")


class TestBuildMatches:
    def test_cross_match_count_twenty_splits(self):
        rng = np.random.default_rng(0)
        table = table_from_matrix(
            {"a": list(rng.normal(size=20)), "b": list(rng.normal(size=20))}
        )
        counts = build_matches(table, "d1", PairingMode.CROSS)
        assert counts.n[0, 1] == 400.0
        assert counts.w[0, 1] + counts.w[1, 0] == 400.0

    def test_paired_match_count_and_wins(self):
        # one model wins 14 of 20 paired comparisons
        a = [float(k) for k in range(20)]
        b = [a[k] + (-1.0 if k < 14 else 1.0) for k in range(20)]
        table = table_from_matrix({"glm": a, "kknn": b})
        counts = build_matches(table, "d1", PairingMode.PAIRED)
        i = counts.model_index("glm")
        j = counts.model_index("kknn")
        assert counts.n[i, j] == 20.0
        assert counts.w[i, j] == 14.0

    def test_total_tie_half_policy(self):
        table = table_from_matrix({"a": [1.0, 1.0, 1.0], "b": [1.0, 1.0, 1.0]})
        counts = build_matches(table, "d1", PairingMode.PAIRED, TiePolicy.HALF)
        assert counts.w[0, 1] == counts.w[1, 0] == 1.5
        assert counts.n[0, 1] == 3.0

    def test_total_tie_drop_policy(self):
        table = table_from_matrix({"a": [1.0, 1.0, 1.0], "b": [1.0, 1.0, 1.0]})
        counts = build_matches(table, "d1", PairingMode.PAIRED, TiePolicy.DROP)
        assert counts.w[0, 1] == 0.0
        assert counts.n[0, 1] == 0.0

    def test_drop_reduces_n_half_keeps_it(self):
        table = table_from_matrix({"a": [1.0, 2.0], "b": [2.0, 3.0]})
        half = build_matches(table, "d1", PairingMode.CROSS, TiePolicy.HALF)
        drop = build_matches(table, "d1", PairingMode.CROSS, TiePolicy.DROP)
        assert half.n[0, 1] == 4.0
        assert drop.n[0, 1] == 3.0  # one exact tie dropped
        assert half.w[0, 1] == drop.w[0, 1] + 0.5

    def test_paired_mismatch_lists_models(self):
        table = table_from_matrix(
            {"a": [1.0, 2.0], "b": [1.0, 2.0], "c": [1.0]},
            splits=None,
        )
        with pytest.raises(PairedSplitsMismatchError) as err:
            build_matches(table, "d1", PairingMode.PAIRED)
        assert err.value.models == ["c"]

    def test_unknown_dataset(self):
        table = table_from_matrix({"a": [1.0]})
        with pytest.raises(KeyError):
            build_matches(table, "nope")

    def test_cross_with_unequal_split_counts(self):
        table = table_from_matrix({"a": [1.0, 2.0, 3.0], "b": [1.5, 2.5]})
        counts = build_matches(table, "d1", PairingMode.CROSS)
        assert counts.n[0, 1] == 6.0
        assert counts.w[0, 1] == 3.0  # 2>1.5, 3>1.5, 3>2.5

    @pytest.mark.parametrize("paired", [False, True])
    @pytest.mark.parametrize("half", [False, True])
    def test_matches_naive_double_loop(self, paired, half):
        rng = np.random.default_rng(42)
        for _ in range(5):
            m, s = rng.integers(2, 5), rng.integers(2, 6)
            raw = rng.integers(0, 4, size=(m, s)).astype(float)  # many ties
            table = table_from_matrix({f"m{i}": list(raw[i]) for i in range(m)})
            counts = build_matches(
                table,
                "d1",
                PairingMode.PAIRED if paired else PairingMode.CROSS,
                TiePolicy.HALF if half else TiePolicy.DROP,
            )
            order = [counts.model_index(f"m{i}") for i in range(m)]
            w_ref, n_ref = naive_pairwise_counts(
                [list(raw[i]) for i in range(m)], paired, half
            )
            assert np.array_equal(counts.w[np.ix_(order, order)], w_ref)
            assert np.array_equal(counts.n[np.ix_(order, order)], n_ref)

    def test_monotone_transform_invariance_bit_exact(self):
        rng = np.random.default_rng(1)
        raw = rng.normal(size=(4, 10))
        table = table_from_matrix({f"m{i}": list(raw[i]) for i in range(4)})
        transformed = table_from_matrix(
            {f"m{i}": list(np.exp(raw[i]) * 3.0 + 1.0) for i in range(4)}
        )
        c1 = build_matches(table, "d1")
        c2 = build_matches(transformed, "d1")
        assert np.array_equal(c1.w, c2.w)
        assert np.array_equal(c1.n, c2.n)

    def test_antisymmetry_random_ledgers(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            m, s = rng.integers(2, 6), rng.integers(1, 8)
            raw = rng.integers(0, 3, size=(m, s)).astype(float)
            table = table_from_matrix({f"m{i}": list(raw[i]) for i in range(m)})
            counts = build_matches(table, "d1")
            assert np.allclose(counts.w + counts.w.T, counts.n)
            assert np.all(np.diag(counts.w) == 0)


class TestEmpiricalWinRate:
    def test_values(self):
        counts = PairwiseCounts(
            "d", ("a", "b"), np.array([[0, 264.0], [136.0, 0]]),
            np.array([[0, 400.0], [400.0, 0]]),
        )
        assert empirical_win_rate(counts, "a", "b") == pytest.approx(0.66)
        assert empirical_win_rate(counts, 1, 0) == pytest.approx(0.34)

    def test_near_even_win_rate(self):
        counts = PairwiseCounts(
            "d", ("gbm", "ranger"), np.array([[0, 201.0], [199.0, 0]]),
            np.array([[0, 400.0], [400.0, 0]]),
        )
        assert empirical_win_rate(counts, 0, 1) == pytest.approx(0.5025)

    def test_zero_wins(self):
        counts = PairwiseCounts(
            "d", ("a", "b"), np.array([[0, 0.0], [5.0, 0]]),
            np.array([[0, 5.0], [5.0, 0]]),
        )
        assert empirical_win_rate(counts, 0, 1) == 0.0

    def test_no_matches_error(self):
        counts = PairwiseCounts(
            "d", ("a", "b"), np.zeros((2, 2)), np.zeros((2, 2))
        )
        with pytest.raises(UndefinedWinRateError):
            empirical_win_rate(counts, 0, 1)


class TestSerialization:
    def test_json_round_trip(self):
        counts = PairwiseCounts(
            "d1", ("a", "b"), np.array([[0, 2.5], [1.5, 0]]),
            np.array([[0, 4.0], [4.0, 0]]),
        )
        again = PairwiseCounts.from_json_text(counts.to_json_text())
        assert again.dataset_id == "d1"
        assert again.models == ("a", "b")
        assert np.array_equal(again.w, counts.w)
        assert np.array_equal(again.n, counts.n)

    def test_invariant_checker_rejects_bad_ledger(self):
        bad = PairwiseCounts(
            "d", ("a", "b"), np.array([[0, 3.0], [2.0, 0]]),
            np.array([[0, 4.0], [4.0, 0]]),
        )
        with pytest.raises(ValueError):
            bad.check_invariants()
