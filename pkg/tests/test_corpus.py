import json
import math

import pytest
from hypothesis import given, strategies as st

from metaphor_eval import corpus as C


def _write(path, lines):
    path.write_text("\n".join(json.dumps(obj) if isinstance(obj, dict) else obj for obj in lines) + "\n")
    return path


def _rec(vid, split="train", duration=30, refs=None):
    return {
        "video_id": vid,
        "source_url": f"https://videos.example/v/{vid}",
        "duration_s": duration,
        "split": split,
        "references": refs or [f"the cat is as fast as a dog {i}" for i in range(3)],
    }


class TestLoadCorpus:
    def test_fixture_shape(self, vmcd):
        corpus = C.load_corpus(vmcd.corpus_path)
        assert len(corpus) == 705
        assert corpus.split_counts == {"train": 400, "val": 55, "test": 250}
        assert corpus.caption_counts == {"train": 1200, "val": 165, "test": 750}

    def test_empty_file(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("")
        assert len(C.load_corpus(p)) == 0

    def test_duplicate_video_id(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1"), _rec("v1")])
        with pytest.raises(C.CorpusError, match="line 2.*duplicate"):
            C.load_corpus(p)

    def test_wrong_caption_count(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1", refs=["a cat is as big as a dog", "x is as y as z"])])
        with pytest.raises(C.CorpusError, match="line 1.*exactly 3"):
            C.load_corpus(p)

    def test_unknown_split(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1"), _rec("v2", split="dev")])
        with pytest.raises(C.CorpusError, match="line 2.*split"):
            C.load_corpus(p)

    def test_malformed_line(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1"), "{not json"])
        with pytest.raises(C.CorpusError, match="line 2.*malformed"):
            C.load_corpus(p)

    def test_bad_duration(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1", duration=0)])
        with pytest.raises(C.CorpusError, match="line 1.*duration"):
            C.load_corpus(p)

    def test_empty_reference(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1", refs=["ok is as ok as ok", "   ", "z"])])
        with pytest.raises(C.CorpusError, match="line 1.*empty reference"):
            C.load_corpus(p)

    def test_references_are_stripped(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1", refs=["  a  ", "b", "c "])])
        assert C.load_corpus(p).captions["v1"].references == ("a", "b", "c")


class TestStats:
    def test_fixture_means(self, vmcd):
        corpus = C.load_corpus(vmcd.corpus_path)
        stats = C.corpus_stats(corpus)
        assert stats.mean_duration_s == pytest.approx(vmcd.mean_duration_s, abs=1e-9)
        assert stats.mean_duration_s == pytest.approx(54.0, abs=1e-9)
        assert stats.mean_caption_len_words == pytest.approx(vmcd.mean_caption_len_words, abs=1e-9)
        assert round(stats.mean_caption_len_words, 1) == 8.9

    def test_histograms(self, vmcd):
        corpus = C.load_corpus(vmcd.corpus_path)
        stats = C.corpus_stats(corpus)
        assert sum(stats.duration_histogram.values()) == 705
        assert sum(stats.length_histogram.values()) == 2115
        assert all(k % 10 == 0 for k in stats.duration_histogram)
        assert list(stats.duration_histogram) == sorted(stats.duration_histogram)
        # fixture captions are 8 or 9 words long
        assert set(stats.length_histogram) == {8, 9}

    def test_custom_bins(self, tmp_path):
        p = _write(tmp_path / "c.jsonl", [_rec("v1", duration=25), _rec("v2", duration=31)])
        stats = C.corpus_stats(C.load_corpus(p), duration_bin_s=5.0, length_bin_words=2)
        assert stats.duration_histogram == {25.0: 1, 30.0: 1}
        assert set(stats.length_histogram) == {8}

    def test_empty_corpus_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("")
        with pytest.raises(C.CorpusError, match="non-empty"):
            C.corpus_stats(C.load_corpus(p))


class TestAnnotations:
    def test_fixture_load_and_unanimity(self, vmcd):
        anns = C.load_annotations(vmcd.annotations_path)
        assert len(anns) == 3 * 705
        kept = C.unanimity_filter(anns)
        assert len(kept) == len(vmcd.unanimous_ids)
        assert tuple(kept) == vmcd.unanimous_ids

    def test_metaphor_requires_parseable_template(self, tmp_path):
        bad = {
            "video_id": "v1",
            "annotator_id": "a",
            "is_metaphor": True,
            "template_caption": "the cat sat on the mat",
        }
        p = _write(tmp_path / "a.jsonl", [bad])
        with pytest.raises(C.CorpusError, match="line 1.*template_caption"):
            C.load_annotations(p)

    def test_non_metaphor_template_not_checked(self, tmp_path):
        rec = {"video_id": "v1", "annotator_id": "a", "is_metaphor": False, "template_caption": ""}
        p = _write(tmp_path / "a.jsonl", [rec])
        assert C.load_annotations(p)[0].is_metaphor is False

    def test_unanimity_needs_three_records(self):
        recs = [
            C.AnnotationRecord("v1", a, True, False, "", "", "", "", "x is as y as z", "")
            for a in ("a", "b")
        ]
        with pytest.raises(C.CorpusError, match="expected 3"):
            C.unanimity_filter(recs)

    def test_unanimity_majority_not_enough(self):
        recs = [
            C.AnnotationRecord("v1", a, flag, False, "", "", "", "", "x is as y as z" if flag else "", "")
            for a, flag in (("a", True), ("b", True), ("c", False))
        ]
        assert C.unanimity_filter(recs) == []


class TestPredictions:
    def test_load_and_validate(self, tmp_path, vmcd):
        corpus = C.load_corpus(vmcd.corpus_path)
        test_ids = corpus.split_ids("test")
        p = _write(tmp_path / "p.jsonl", [{"video_id": v, "caption": "x is as y as z"} for v in test_ids[:-2]])
        preds = C.load_predictions(p, "m1", 1)
        assert preds.model_id == "m1" and preds.run_id == 1
        missing = C.validate_predictions(corpus, preds)
        assert missing == sorted(test_ids[-2:])

    def test_unknown_video_rejected(self, tmp_path, vmcd):
        corpus = C.load_corpus(vmcd.corpus_path)
        p = _write(tmp_path / "p.jsonl", [{"video_id": "nope", "caption": "x"}])
        with pytest.raises(C.CorpusError, match="outside the test split"):
            C.validate_predictions(corpus, C.load_predictions(p, "m1", 1))

    def test_train_video_rejected(self, tmp_path, vmcd):
        corpus = C.load_corpus(vmcd.corpus_path)
        train_id = corpus.split_ids("train")[0]
        p = _write(tmp_path / "p.jsonl", [{"video_id": train_id, "caption": "x"}])
        with pytest.raises(C.CorpusError, match="outside the test split"):
            C.validate_predictions(corpus, C.load_predictions(p, "m1", 1))

    def test_duplicate_prediction(self, tmp_path):
        p = _write(tmp_path / "p.jsonl", [{"video_id": "v", "caption": "a"}, {"video_id": "v", "caption": "b"}])
        with pytest.raises(C.CorpusError, match="line 2.*duplicate"):
            C.load_predictions(p, "m", 1)

    def test_run_id_positive(self):
        with pytest.raises(C.CorpusError, match="run_id"):
            C.PredictionSet("m", 0, {})


class TestFramePlans:
    def test_three_segment_exact(self):
        plan = C.plan_frames(90.0)
        assert plan.timestamps_s == (10.0, 20.0, 40.0, 50.0, 70.0, 80.0)
        assert plan.strategy == C.THREE_SEGMENT

    @given(st.floats(min_value=0.5, max_value=86400.0, allow_nan=False))
    def test_three_segment_invariants(self, duration):
        ts = C.plan_frames(duration).timestamps_s
        assert len(ts) == 6
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert 0.0 <= ts[0] and ts[-1] <= duration

    @pytest.mark.parametrize("k", C.CLIP_COUNTS)
    def test_clip_split_partitions(self, k):
        duration = 77.0
        plan = C.plan_frames(duration, C.CLIP_SPLIT, clips=k)
        assert len(plan.timestamps_s) == 6 * k
        assert all(b > a for a, b in zip(plan.timestamps_s, plan.timestamps_s[1:]))
        groups = plan.groups
        assert len(groups) == k
        clip_len = duration / k
        for g, group in enumerate(groups):
            assert len(group) == 6
            assert all(g * clip_len <= t <= (g + 1) * clip_len for t in group)

    def test_clip_split_k1_matches_three_segment(self):
        a = C.plan_frames(63.0).timestamps_s
        b = C.plan_frames(63.0, C.CLIP_SPLIT, clips=1).timestamps_s
        assert a == pytest.approx(b)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            C.plan_frames(0.0)
        with pytest.raises(ValueError):
            C.plan_frames(-3.0)
        with pytest.raises(ValueError):
            C.plan_frames(10.0, C.CLIP_SPLIT, clips=3)
        with pytest.raises(ValueError):
            C.plan_frames(10.0, "every_frame")


def test_brand_warnings(tmp_path):
    refs = ["the coke is as cold as ice", "the drink is as cold as ice", "a can is as red as a rose"]
    p = _write(tmp_path / "c.jsonl", [_rec("v1", refs=refs), _rec("v2")])
    hits = C.brand_warnings(C.load_corpus(p))
    assert hits == [("v1", "coke")]


def test_fixture_has_no_brand_tokens(vmcd):
    assert C.brand_warnings(C.load_corpus(vmcd.corpus_path)) == []
