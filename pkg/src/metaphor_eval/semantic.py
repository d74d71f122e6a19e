"""Embedding-based caption scoring.

Two ingredients: greedy token matching between hypothesis and reference
(precision from row maxima, recall from column maxima of the cosine
matrix), and the concept-distance score for templated metaphors, where a
caption's creativity contribution is f1 * (1 - cs).  Captions that do not
parse as a template take cs = 1, zeroing their contribution.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import template
from ._kernels import match_means
from .embed import cosine
from .ngram import tokenize


@dataclass(frozen=True)
class BertScoreTriple:
    p: float
    r: float
    f1: float


@dataclass(frozen=True)
class ConceptScore:
    cs: float
    penalty_applied: bool
    parse_status: str


@dataclass(frozen=True)
class CaptionRow:
    video_id: str
    f1: float
    cs: float
    contribution: float


@dataclass(frozen=True)
class AcdReport:
    acs: float
    acd: float
    n: int
    per_caption: tuple[CaptionRow, ...]


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def build_idf(reference_captions: list[str]) -> dict[str, float]:
    """Smoothed inverse document frequency over reference captions.

    idf(w) = log((M + 1) / (df(w) + 1)) with one caption = one document;
    unseen tokens get the full log(M + 1).
    """
    m = len(reference_captions)
    df: dict[str, int] = {}
    for cap in reference_captions:
        for tok in set(tokenize(cap)):
            df[tok] = df.get(tok, 0) + 1
    table = {tok: math.log((m + 1) / (d + 1)) for tok, d in df.items()}
    table["__default__"] = math.log(m + 1)
    return table


def _weights(tokens: list[str], idf_table: dict[str, float] | None) -> np.ndarray | None:
    if idf_table is None:
        return None
    raw = np.array([idf_table.get(t, idf_table["__default__"]) for t in tokens], dtype=np.float64)
    total = raw.sum()
    if total <= 0:
        return None  # degenerate table, fall back to uniform
    return raw / total


def _rescale(x: float, baseline: float) -> float:
    return (x - baseline) / (1.0 - baseline)


def bertscore(
    hypothesis: str,
    references: list[str],
    provider,
    idf_table: dict[str, float] | None = None,
    baseline: float | None = None,
) -> BertScoreTriple:
    """Greedy-matching score against the best reference (highest F1).

    Empty token sequences on either side score zero for that pair; a fully
    empty comparison yields (0, 0, 0) with a warning.
    """
    hyp_tokens = tokenize(hypothesis)
    best = None
    for ref in references:
        ref_tokens = tokenize(ref)
        if not hyp_tokens or not ref_tokens:
            warnings.warn(f"empty token sequence in bertscore pair ({hypothesis!r} vs {ref!r})")
            triple = BertScoreTriple(0.0, 0.0, 0.0)
        else:
            vectors = provider.embed(hyp_tokens + ref_tokens, "token")
            u = np.stack([v.values for v in vectors[: len(hyp_tokens)]])
            v = np.stack([v.values for v in vectors[len(hyp_tokens) :]])
            sim = np.clip(u @ v.T, -1.0, 1.0)
            p, r = match_means(sim, _weights(hyp_tokens, idf_table), _weights(ref_tokens, idf_table))
            triple = BertScoreTriple(p, r, _f1(p, r))
        if best is None or triple.f1 > best.f1:
            best = triple
    if best is None:
        raise ValueError("bertscore needs at least one reference")
    if baseline is not None:
        best = BertScoreTriple(
            _rescale(best.p, baseline), _rescale(best.r, baseline), _rescale(best.f1, baseline)
        )
    return best


def concept_similarity(caption: str, provider, clamp: bool = True) -> ConceptScore:
    """Cosine between the primary and secondary concept embeddings.

    A caption that fails template parsing is maximally non-creative by
    definition: cs = 1 with the penalty flag set.
    """
    pm = template.parse_caption(caption)
    if not pm.ok:
        return ConceptScore(1.0, True, pm.status)
    vec_pc, vec_sc = provider.embed([pm.primary_concept, pm.secondary_concept], "sentence")
    raw = cosine(vec_pc, vec_sc)
    cs = min(max(raw, 0.0), 1.0) if clamp else raw
    return ConceptScore(cs, False, pm.status)


def acd_report(
    video_ids: list[str],
    hypotheses: list[str],
    references: list[list[str]],
    provider,
    clamp_cs: bool = True,
    use_idf: bool = False,
    baseline: float | None = None,
    workers: int = 1,
) -> AcdReport:
    """Creativity scoring over a set of captions.

    acs is the plain mean concept similarity (lower means more distant,
    more creative pairings); acd weights the distance of each caption by
    its bertscore f1, so fluent-but-literal and creative-but-garbled
    captions both score low.  ``workers`` > 1 scores captions in a thread
    pool; results stay in input order.
    """
    if not (len(video_ids) == len(hypotheses) == len(references)):
        raise ValueError("video_ids, hypotheses and references must align")
    if not video_ids:
        raise ValueError("need at least one caption")
    idf_table = build_idf([r for refs in references for r in refs]) if use_idf else None

    def score_one(args) -> CaptionRow:
        vid, hyp, refs = args
        triple = bertscore(hyp, refs, provider, idf_table=idf_table, baseline=baseline)
        concept = concept_similarity(hyp, provider, clamp=clamp_cs)
        return CaptionRow(vid, triple.f1, concept.cs, triple.f1 * (1.0 - concept.cs))

    items = list(zip(video_ids, hypotheses, references))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(score_one, items))
    else:
        rows = [score_one(item) for item in items]
    n = len(rows)
    return AcdReport(
        acs=sum(r.cs for r in rows) / n,
        acd=sum(r.contribution for r in rows) / n,
        n=n,
        per_caption=tuple(rows),
    )


def report_to_json(report: AcdReport) -> str:
    return json.dumps(
        {
            "acs": report.acs,
            "acd": report.acd,
            "n": report.n,
            "per_caption": [
                {"video_id": r.video_id, "f1": r.f1, "cs": r.cs, "contribution": r.contribution}
                for r in report.per_caption
            ],
        },
        indent=2,
    )


def report_to_csv(report: AcdReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["video_id", "f1", "cs", "contribution"])
    for r in report.per_caption:
        writer.writerow([r.video_id, f"{r.f1:.6f}", f"{r.cs:.6f}", f"{r.contribution:.6f}"])
    return buf.getvalue()
