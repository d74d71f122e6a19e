import math
import random

import numpy as np
import pytest
from scipy import stats as scipy_stats

from metaphor_eval import stats
from metaphor_eval.stats import (
    JudgmentLabel,
    StatsError,
    cohens_kappa,
    dedupe_labels,
    fleiss_kappa,
    human_eval_summary,
    iaa_report,
    labels_from_csv,
    labels_to_csv,
    pair_vectors,
    pearson,
)


class TestCohen:
    def test_perfect_agreement(self):
        assert cohens_kappa([1, 0, 1, 0], [1, 0, 1, 0]) == pytest.approx(1.0, abs=1e-9)

    def test_chance_level_is_zero(self):
        assert cohens_kappa([1, 1, 0, 0], [1, 0, 0, 1]) == pytest.approx(0.0, abs=1e-9)

    def test_perfect_disagreement(self):
        assert cohens_kappa([1, 0], [0, 1]) == pytest.approx(-1.0, abs=1e-9)

    def test_degenerate_constant_same(self):
        assert cohens_kappa([1, 1, 1], [1, 1, 1]) == 1.0

    def test_constant_but_different_categories(self):
        # p_e = 0 here, so kappa is well defined and equals p_o = 0
        assert cohens_kappa([1, 1], [0, 0]) == pytest.approx(0.0)

    def test_string_categories(self):
        assert cohens_kappa(["y", "n"], ["n", "y"]) == pytest.approx(-1.0)

    def test_length_mismatch(self):
        with pytest.raises(StatsError):
            cohens_kappa([1], [1, 0])

    def test_empty(self):
        with pytest.raises(StatsError):
            cohens_kappa([], [])


class TestFleiss:
    def test_perfect_single_category(self):
        assert fleiss_kappa([[3, 0], [3, 0]]) == 1.0

    def test_perfect_mixed_categories(self):
        assert fleiss_kappa([[3, 0], [0, 3]]) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_votes_near_zero(self):
        rng = random.Random(42)
        rows = []
        for _ in range(1000):
            yes = sum(rng.random() < 0.5 for _ in range(3))
            rows.append([3 - yes, yes])
        assert abs(fleiss_kappa(rows)) <= 0.05

    def test_hand_computed_values(self):
        # [[2,1],[1,2]]: P_bar = 1/3, P_e = 1/2
        assert fleiss_kappa([[2, 1], [1, 2]]) == pytest.approx(-1.0 / 3.0, abs=1e-12)
        # [[3,0],[1,2]]: P_bar = 2/3, P_e = 5/9
        assert fleiss_kappa([[3, 0], [1, 2]]) == pytest.approx(0.25, abs=1e-12)

    def test_textbook_value(self):
        # classic worked example: 10 items, 14 raters, 5 categories
        table = [
            [0, 0, 0, 0, 14],
            [0, 2, 6, 4, 2],
            [0, 0, 3, 5, 6],
            [0, 3, 9, 2, 0],
            [2, 2, 8, 1, 1],
            [7, 7, 0, 0, 0],
            [3, 2, 6, 3, 0],
            [2, 5, 3, 2, 2],
            [6, 5, 2, 1, 0],
            [0, 2, 2, 3, 7],
        ]
        assert fleiss_kappa(table) == pytest.approx(0.20993, abs=5e-5)

    def test_unequal_raters_rejected(self):
        with pytest.raises(StatsError, match="same number"):
            fleiss_kappa([[2, 1], [1, 1]])

    def test_single_rater_rejected(self):
        with pytest.raises(StatsError, match="at least 2"):
            fleiss_kappa([[1, 0], [0, 1]])


class TestPearson:
    def test_exact_values(self):
        assert pearson([1, 2, 3], [10, 20, 30])[0] == pytest.approx(1.0, abs=1e-9)
        assert pearson([1, 2, 3], [3, 2, 1])[0] == pytest.approx(-1.0, abs=1e-9)
        assert pearson([1, 2, 3], [2, 1, 3])[0] == pytest.approx(0.5, abs=1e-9)

    def test_p_value_matches_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.normal(size=30)
            y = 0.4 * x + rng.normal(size=30)
            r, p = pearson(x, y)
            expected = scipy_stats.pearsonr(x, y)
            assert r == pytest.approx(expected.statistic, abs=1e-12)
            assert p == pytest.approx(expected.pvalue, abs=1e-12)

    def test_perfect_correlation_p_zero(self):
        assert pearson([1, 2, 3, 4], [2, 4, 6, 8]) == (1.0, 0.0)

    def test_degenerate_inputs(self):
        with pytest.raises(StatsError, match="constant"):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(StatsError, match="at least 2"):
            pearson([1], [1])
        with pytest.raises(StatsError):
            pearson([1, 2], [1, 2, 3])


def _label(vid, model, ann, flu=True, cre=False, pcc=True, con=True, ts="2026-01-01T00:00:00+00:00"):
    return JudgmentLabel(vid, model, ann, flu, cre, pcc, con, ts)


class TestLabels:
    def test_csv_round_trip(self):
        labels = [
            _label("v1", "m1", "a"),
            _label("v2", "m1", "b", flu=False, cre=True, pcc=False, con=False),
        ]
        text = labels_to_csv(labels)
        lines = text.strip().split("\n")
        assert lines[0] == "video_id,model_id,annotator_id,fluency,creativity,pcc,consistency,timestamp"
        assert labels_from_csv(text) == labels

    def test_csv_rejects_wrong_header(self):
        with pytest.raises(StatsError, match="header"):
            labels_from_csv("a,b,c\n1,2,3\n")

    def test_csv_rejects_non_boolean(self):
        good = labels_to_csv([_label("v", "m", "a")])
        with pytest.raises(StatsError, match="not a boolean"):
            labels_from_csv(good.replace(",1,0,", ",2,0,", 1))

    def test_flag_parsing(self):
        text = labels_to_csv([_label("v", "m", "a")]).replace("1,0,1,1", "true,no,yes,TRUE")
        (label,) = labels_from_csv(text)
        assert (label.fluency, label.creativity, label.primary_concept_consistency, label.consistency) == (
            True,
            False,
            True,
            True,
        )

    def test_dedupe_last_write_wins(self):
        first = _label("v1", "m1", "a", flu=True)
        second = _label("v1", "m1", "a", flu=False, ts="2026-01-02T00:00:00+00:00")
        other = _label("v2", "m1", "a")
        deduped = dedupe_labels([first, other, second])
        assert len(deduped) == 2
        assert deduped[0].fluency is False  # replaced in place, order preserved
        assert deduped[1] == other

    def test_pair_vectors(self):
        labels = [
            _label("v1", "m", "a", cre=True),
            _label("v1", "m", "b", cre=False),
            _label("v2", "m", "a", cre=True),
            _label("v2", "m", "b", cre=True),
            _label("v3", "m", "a"),  # only annotator a
        ]
        va, vb = pair_vectors(labels, "a", "b", "creativity")
        assert va == [True, True] and vb == [False, True]
        with pytest.raises(StatsError, match="unknown metric"):
            pair_vectors(labels, "a", "b", "sparkle")


class TestIaaReport:
    def _three_rater_labels(self, n=40, seed=3):
        rng = random.Random(seed)
        labels = []
        for i in range(n):
            base = {m: rng.random() < 0.5 for m in stats.METRIC_FIELDS}
            for ann, flip_p in (("a", 0.0), ("b", 0.15), ("c", 0.3)):
                vals = {m: (not v if rng.random() < flip_p else v) for m, v in base.items()}
                labels.append(
                    JudgmentLabel(
                        f"v{i}",
                        "m1",
                        ann,
                        vals["fluency"],
                        vals["creativity"],
                        vals["primary_concept_consistency"],
                        vals["consistency"],
                        "2026-01-01T00:00:00+00:00",
                    )
                )
        return labels

    def test_pairwise_matches_direct_cohen(self):
        labels = self._three_rater_labels()
        report = iaa_report(labels)
        assert set(report.pairwise) == {("a", "b"), ("a", "c"), ("b", "c")}
        for (x, y), scores in report.pairwise.items():
            for metric in stats.METRIC_FIELDS:
                va, vb = pair_vectors(labels, x, y, metric)
                assert scores[metric] == pytest.approx(cohens_kappa(va, vb), abs=1e-12)
            assert "pooled" in scores
        assert report.n_items_per_pair[("a", "b")] == 40

    def test_pooled_pairwise_concatenates_metrics(self):
        labels = self._three_rater_labels(n=10)
        report = iaa_report(labels)
        va, vb = [], []
        for metric in stats.METRIC_FIELDS:
            xa, xb = pair_vectors(labels, "a", "b", metric)
            va.extend(xa)
            vb.extend(xb)
        assert report.pairwise[("a", "b")]["pooled"] == pytest.approx(cohens_kappa(va, vb), abs=1e-12)

    def test_fleiss_present_when_all_rate(self):
        report = iaa_report(self._three_rater_labels(n=25))
        for metric in stats.METRIC_FIELDS:
            assert -1.0 <= report.fleiss[metric] <= 1.0
        assert "pooled" in report.fleiss

    def test_agreement_ordering_follows_noise(self):
        report = iaa_report(self._three_rater_labels(n=400, seed=11))
        assert report.pairwise[("a", "b")]["pooled"] > report.pairwise[("a", "c")]["pooled"]


class TestHumanEvalSummary:
    def test_fractions(self):
        labels = [
            _label("v1", "m1", "a", flu=True, cre=True),
            _label("v2", "m1", "a", flu=True, cre=False),
            _label("v1", "m2", "a", flu=False, cre=False),
        ]
        summary = human_eval_summary(labels)
        assert summary["m1"]["fluency"] == 1.0
        assert summary["m1"]["creativity"] == 0.5
        assert summary["m1"]["n"] == 2
        assert summary["m2"]["fluency"] == 0.0
        assert summary["m2"]["n"] == 1

    def test_dedupe_applied(self):
        labels = [
            _label("v1", "m1", "a", flu=False),
            _label("v1", "m1", "a", flu=True, ts="2026-01-02T00:00:00+00:00"),
        ]
        assert human_eval_summary(labels)["m1"]["fluency"] == 1.0

    def test_empty_rejected(self):
        with pytest.raises(StatsError):
            human_eval_summary([])
