"""Corpus-level n-gram metrics: BLEU-4, ROUGE-L, CIDEr.

All three score a list of hypothesis captions against per-item reference
lists and report on a 0..100 scale.  ``per_item`` keeps the pre-scaling
values (ROUGE in [0, 1], CIDEr in [0, 10]); BLEU is corpus-level only.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from ._kernels import lcs_length

_WORD = re.compile(r"\w+")

MAX_N = 4
BLEU_EPS = 1e-9
ROUGE_BETA = 1.2
CIDER_SIGMA = 6.0


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; punctuation separates and is dropped."""
    return _WORD.findall(text.lower())


@dataclass(frozen=True)
class NgramScore:
    metric: str
    value: float
    per_item: tuple[float, ...] | None = None


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _check_aligned(hypotheses, references):
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} reference lists")
    if not hypotheses:
        raise ValueError("need at least one hypothesis")
    for i, refs in enumerate(references):
        if not refs:
            raise ValueError(f"item {i} has no references")


def bleu4(hypotheses: list[str], references: list[list[str]], smooth: bool = False) -> NgramScore:
    """Corpus BLEU with modified n-gram precision up to 4-grams.

    Brevity penalty uses the closest reference length (ties go to the
    shorter reference).  Orders whose corpus-wide guess count is zero are
    left out of the geometric mean, so short hypotheses are scored over the
    orders they support.  ``smooth`` floors zero clipped counts at a tiny
    epsilon instead of zeroing the whole score.
    """
    _check_aligned(hypotheses, references)
    clipped = [0] * (MAX_N + 1)
    guesses = [0] * (MAX_N + 1)
    hyp_len = 0
    ref_len = 0
    for hyp, refs in zip(hypotheses, references):
        h = tokenize(hyp)
        rs = [tokenize(r) for r in refs]
        hyp_len += len(h)
        ref_len += min((abs(len(r) - len(h)), len(r)) for r in rs)[1]
        for n in range(1, MAX_N + 1):
            counts = _ngram_counts(h, n)
            cap: Counter = Counter()
            for r in rs:
                for g, cnt in _ngram_counts(r, n).items():
                    cap[g] = max(cap[g], cnt)
            for g, cnt in counts.items():
                clipped[n] += min(cnt, cap[g])
                guesses[n] += cnt
    if hyp_len == 0:
        return NgramScore("bleu4", 0.0)
    log_sum = 0.0
    orders = 0
    for n in range(1, MAX_N + 1):
        if guesses[n] == 0:
            continue
        num = clipped[n]
        if num == 0:
            if not smooth:
                return NgramScore("bleu4", 0.0)
            num = BLEU_EPS
        log_sum += math.log(num / guesses[n])
        orders += 1
    geo = math.exp(log_sum / orders)
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return NgramScore("bleu4", 100.0 * bp * geo)


def _lcs(a: list[str], b: list[str]) -> int:
    vocab: dict[str, int] = {}
    ia = np.fromiter((vocab.setdefault(t, len(vocab)) for t in a), dtype=np.int64, count=len(a))
    ib = np.fromiter((vocab.setdefault(t, len(vocab)) for t in b), dtype=np.int64, count=len(b))
    return int(lcs_length(ia, ib))


def rouge_l(hypotheses: list[str], references: list[list[str]], beta: float = ROUGE_BETA) -> NgramScore:
    """LCS-based F measure, best reference per item, mean over items."""
    _check_aligned(hypotheses, references)
    per_item = []
    for hyp, refs in zip(hypotheses, references):
        h = tokenize(hyp)
        best = 0.0
        for ref in refs:
            r = tokenize(ref)
            if not h or not r:
                continue
            lcs = _lcs(h, r)
            prec = lcs / len(h)
            rec = lcs / len(r)
            if prec + rec > 0:
                f = (1 + beta**2) * prec * rec / (rec + beta**2 * prec)
                best = max(best, f)
        per_item.append(best)
    return NgramScore("rouge_l", 100.0 * sum(per_item) / len(per_item), tuple(per_item))


def _tfidf(counts: Counter, df: dict, log_docs: float) -> tuple[dict, float]:
    vec = {}
    sq = 0.0
    for g, tf in counts.items():
        w = tf * (log_docs - math.log(max(1.0, df[g])))
        vec[g] = w
        sq += w * w
    return vec, math.sqrt(sq)


def cider(
    hypotheses: list[str],
    references: list[list[str]],
    use_d: bool = False,
    sigma: float = CIDER_SIGMA,
) -> NgramScore:
    """Consensus scoring via tf-idf n-gram cosine, n = 1..4.

    Document frequencies come from the reference sets being evaluated, so a
    meaningful IDF needs at least two items.  ``use_d`` switches to the
    clipped-numerator variant with a gaussian length penalty.
    """
    _check_aligned(hypotheses, references)
    if len(references) < 2:
        raise ValueError("CIDEr needs references for at least 2 videos to form IDF weights")
    df: list[dict] = [defaultdict(float) for _ in range(MAX_N + 1)]
    for refs in references:
        for n in range(1, MAX_N + 1):
            seen = set()
            for r in refs:
                seen.update(_ngram_counts(tokenize(r), n))
            for g in seen:
                df[n][g] += 1.0
    log_docs = math.log(len(references))
    per_item = []
    for hyp, refs in zip(hypotheses, references):
        h = tokenize(hyp)
        sims = 0.0
        for n in range(1, MAX_N + 1):
            hvec, hnorm = _tfidf(_ngram_counts(h, n), df[n], log_docs)
            acc = 0.0
            for ref in refs:
                r = tokenize(ref)
                rvec, rnorm = _tfidf(_ngram_counts(r, n), df[n], log_docs)
                if hnorm == 0.0 or rnorm == 0.0:
                    continue
                if use_d:
                    dot = sum(min(w, rvec.get(g, 0.0)) * rvec.get(g, 0.0) for g, w in hvec.items())
                    penalty = math.exp(-((len(h) - len(r)) ** 2) / (2 * sigma**2))
                    acc += penalty * dot / (hnorm * rnorm)
                else:
                    acc += sum(w * rvec.get(g, 0.0) for g, w in hvec.items()) / (hnorm * rnorm)
            sims += acc / len(refs)
        per_item.append(10.0 * sims / MAX_N)
    return NgramScore("cider_d" if use_d else "cider", 10.0 * sum(per_item) / len(per_item), tuple(per_item))
