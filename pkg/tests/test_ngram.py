import math
import random

import pytest

import oracles
from metaphor_eval import ngram


def test_tokenize():
    assert ngram.tokenize("The cat, sat!") == ["the", "cat", "sat"]
    assert ngram.tokenize("") == []
    assert ngram.tokenize("don't-stop") == ["don", "t", "stop"]


class TestBleu:
    def test_identity(self):
        s = ngram.bleu4(["the cat sat on the mat"], [["the cat sat on the mat"]])
        assert s.value == pytest.approx(100.0, abs=1e-9)

    def test_short_hypothesis_frozen(self):
        # 1- and 2-gram precision are perfect, 3-/4-grams drop out, and the
        # brevity penalty is exp(1 - 3/2)
        s = ngram.bleu4(["the cat"], [["the cat sat"]])
        assert s.value == pytest.approx(100.0 * math.exp(-0.5), abs=1e-9)

    def test_no_overlap_is_zero(self):
        s = ngram.bleu4(["a b c d"], [["x y z w"]])
        assert s.value == 0.0

    def test_smoothing_keeps_score_positive(self):
        hyp = ["the cat sat mat on"]
        refs = [["the cat sat on the mat"]]
        assert ngram.bleu4(hyp, refs).value == 0.0  # no 3-gram match
        assert 0.0 < ngram.bleu4(hyp, refs, smooth=True).value < 100.0

    def test_closest_ref_length_tie_prefers_shorter(self):
        # hyp len 3; refs len 2 and 4 tie on distance, r must be 2 -> BP = 1
        s = ngram.bleu4(["a b c"], [["a b", "a b c d"]])
        oracle = oracles.bleu4_oracle(["a b c"], [["a b", "a b c d"]])
        assert s.value == pytest.approx(100.0 * oracle, abs=1e-9)

    def test_all_empty_hypotheses(self):
        assert ngram.bleu4(["", ""], [["a b"], ["c d"]]).value == 0.0


class TestRouge:
    def test_identity(self):
        s = ngram.rouge_l(["a b c"], [["a b c"]])
        assert s.value == pytest.approx(100.0, abs=1e-9)
        assert s.per_item == (pytest.approx(1.0),)

    def test_frozen_value(self):
        # lcs=3, P=1, R=0.5, beta=1.2: F = 2.44*0.5/(0.5+1.44) = 0.6288659793814433
        s = ngram.rouge_l(["the cat sat"], [["the cat sat on the mat"]])
        assert s.per_item[0] == pytest.approx(0.6288659793814433, abs=1e-12)

    def test_empty_hypothesis_zero(self):
        s = ngram.rouge_l([""], [["a b c"]])
        assert s.value == 0.0 and s.per_item == (0.0,)

    def test_best_reference_wins(self):
        s = ngram.rouge_l(["a b c"], [["x y", "a b c"]])
        assert s.per_item[0] == pytest.approx(1.0)


class TestCider:
    def test_identity_disjoint_vocab(self):
        hyps = ["a b c d e", "f g h i j"]
        refs = [["a b c d e"], ["f g h i j"]]
        s = ngram.cider(hyps, refs)
        assert s.value == pytest.approx(100.0, abs=1e-9)
        assert s.per_item == (pytest.approx(10.0), pytest.approx(10.0))

    def test_needs_two_videos(self):
        with pytest.raises(ValueError, match="at least 2"):
            ngram.cider(["a"], [["a"]])

    def test_shared_ngrams_carry_no_idf(self):
        # every n-gram occurs in both reference sets, so idf = 0 everywhere
        hyps = ["a b", "a b"]
        refs = [["a b"], ["a b"]]
        assert ngram.cider(hyps, refs).value == 0.0

    def test_cider_d_length_penalty(self):
        hyps = ["a b c d e f g h i j k l", "z z"]
        refs = [["a b c"], ["z q r"]]
        plain = ngram.cider(hyps, refs)
        d = ngram.cider(hyps, refs, use_d=True)
        assert d.metric == "cider_d"
        assert d.per_item[0] < plain.per_item[0]


class TestAlignment:
    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            ngram.bleu4(["a"], [["a"], ["b"]])

    def test_empty_reference_list(self):
        with pytest.raises(ValueError, match="no references"):
            ngram.rouge_l(["a"], [[]])

    def test_no_items(self):
        with pytest.raises(ValueError):
            ngram.bleu4([], [])


def _toy_corpus(rng):
    vocab = [f"w{i}" for i in range(10)]
    n_items = rng.randint(2, 5)
    hyps, refs = [], []
    for _ in range(n_items):
        hyps.append(" ".join(rng.choice(vocab) for _ in range(rng.randint(0, 8))))
        refs.append(
            [" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 9))) for _ in range(rng.randint(1, 3))]
        )
    return hyps, refs


@pytest.mark.parametrize("seed", range(25))
def test_matches_oracles_on_random_corpora(seed):
    rng = random.Random(seed)
    hyps, refs = _toy_corpus(rng)

    impl = ngram.bleu4(hyps, refs).value / 100.0
    assert impl == pytest.approx(oracles.bleu4_oracle(hyps, refs), abs=1e-6)

    impl_s = ngram.bleu4(hyps, refs, smooth=True).value / 100.0
    assert impl_s == pytest.approx(oracles.bleu4_oracle(hyps, refs, smooth_eps=ngram.BLEU_EPS), abs=1e-6)

    impl_r = ngram.rouge_l(hyps, refs)
    assert impl_r.value / 100.0 == pytest.approx(oracles.rouge_l_oracle(hyps, refs), abs=1e-6)
    assert all(0.0 <= v <= 1.0 for v in impl_r.per_item)

    impl_c = ngram.cider(hyps, refs)
    assert impl_c.value / 100.0 == pytest.approx(oracles.cider_oracle(hyps, refs) / 10.0, abs=1e-6)
    assert all(0.0 <= v <= 10.0 + 1e-9 for v in impl_c.per_item)

    impl_d = ngram.cider(hyps, refs, use_d=True)
    assert impl_d.value / 100.0 == pytest.approx(oracles.cider_oracle(hyps, refs, sigma=6.0) / 10.0, abs=1e-6)

    for score in (ngram.bleu4(hyps, refs), impl_r, impl_c, impl_d):
        assert 0.0 <= score.value <= 100.0 + 1e-9
