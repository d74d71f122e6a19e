"""Inter-annotator agreement and human-judgment bookkeeping.

Judgments are binary per metric (fluency, creativity, primary concept
consistency, consistency).  Agreement is reported as pairwise Cohen kappa
and a Fleiss kappa over items every annotator rated, both per metric and
pooled across the four metrics.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np
from scipy import special

METRIC_FIELDS = ("fluency", "creativity", "primary_concept_consistency", "consistency")

# short column names used in the export format
_CSV_COLUMNS = ("video_id", "model_id", "annotator_id", "fluency", "creativity", "pcc", "consistency", "timestamp")


class StatsError(ValueError):
    """Degenerate or malformed input to an agreement statistic."""


@dataclass(frozen=True)
class JudgmentLabel:
    video_id: str
    model_id: str
    annotator_id: str
    fluency: bool
    creativity: bool
    primary_concept_consistency: bool
    consistency: bool
    timestamp: str

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.video_id, self.model_id, self.annotator_id)


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def cohens_kappa(a: list, b: list) -> float:
    """Chance-corrected agreement between two raters over the same items.

    kappa = (p_o - p_e) / (1 - p_e).  When expected agreement is already
    perfect the statistic is defined only for perfect observed agreement
    (1.0); anything else is degenerate and rejected.
    """
    if len(a) != len(b):
        raise StatsError(f"rating vectors differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise StatsError("need at least one rated item")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    freq_a = Counter(a)
    freq_b = Counter(b)
    p_e = sum(freq_a[cat] * freq_b.get(cat, 0) for cat in freq_a) / (n * n)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise StatsError("expected agreement is 1 but observed is not; kappa undefined")
    return (p_o - p_e) / (1.0 - p_e)


def fleiss_kappa(counts) -> float:
    """Agreement among a fixed number of raters from an item x category count matrix.

    Every row must sum to the same rater count n >= 2.  Unanimous agreement
    on one category across all items is perfect agreement, 1.0 by
    definition; other cases with zero chance-corrected room are rejected.
    """
    m = np.asarray(counts, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise StatsError("expected a 2-D item x category count matrix")
    raters = m.sum(axis=1)
    n = raters[0]
    if n < 2:
        raise StatsError("fleiss kappa needs at least 2 raters per item")
    if not np.all(raters == n):
        raise StatsError("every item must be rated by the same number of raters")
    p_i = ((m * m).sum(axis=1) - n) / (n * (n - 1))
    p_bar = float(p_i.mean())
    p_j = m.sum(axis=0) / m.sum()
    p_e = float((p_j * p_j).sum())
    if p_e == 1.0:
        if p_bar == 1.0:
            return 1.0
        raise StatsError("expected agreement is 1 but observed is not; kappa undefined")
    return (p_bar - p_e) / (1.0 - p_e)


def pearson(x, y) -> tuple[float, float]:
    """Correlation coefficient with a two-sided t-approximation p-value."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise StatsError("x and y must be 1-D and the same length")
    n = xs.shape[0]
    if n < 2:
        raise StatsError("pearson needs at least 2 points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise StatsError("pearson undefined for constant input")
    r = float(np.clip((dx * dy).sum() / (sx * sy), -1.0, 1.0))
    if 1.0 - abs(r) < 1e-12:
        # collinear up to float rounding; a noise-driven t would be misleading
        r = math.copysign(1.0, r)
    if n == 2 or abs(r) == 1.0:
        return r, 0.0
    nu = n - 2
    t_sq = r * r * nu / (1.0 - r * r)
    p = float(special.betainc(nu / 2.0, 0.5, nu / (nu + t_sq)))
    return r, p


def dedupe_labels(labels: list[JudgmentLabel]) -> list[JudgmentLabel]:
    """Collapse resubmissions: the last label per (video, model, annotator) wins."""
    table: dict[tuple, JudgmentLabel] = {}
    for label in labels:
        table[label.key] = label
    return list(table.values())


def labels_to_csv(labels: list[JudgmentLabel]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for l in labels:
        writer.writerow(
            [
                l.video_id,
                l.model_id,
                l.annotator_id,
                int(l.fluency),
                int(l.creativity),
                int(l.primary_concept_consistency),
                int(l.consistency),
                l.timestamp,
            ]
        )
    return buf.getvalue()


def _parse_flag(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes"):
        return True
    if v in ("0", "false", "no"):
        return False
    raise StatsError(f"not a boolean judgment: {value!r}")


def labels_from_csv(text: str) -> list[JudgmentLabel]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != _CSV_COLUMNS:
        raise StatsError(f"expected header {','.join(_CSV_COLUMNS)}")
    out = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(_CSV_COLUMNS):
            raise StatsError(f"expected {len(_CSV_COLUMNS)} columns, got {len(row)}")
        out.append(
            JudgmentLabel(
                video_id=row[0],
                model_id=row[1],
                annotator_id=row[2],
                fluency=_parse_flag(row[3]),
                creativity=_parse_flag(row[4]),
                primary_concept_consistency=_parse_flag(row[5]),
                consistency=_parse_flag(row[6]),
                timestamp=row[7],
            )
        )
    return out


def _by_item(labels: list[JudgmentLabel]) -> dict[tuple[str, str], dict[str, JudgmentLabel]]:
    table: dict[tuple[str, str], dict[str, JudgmentLabel]] = defaultdict(dict)
    for l in labels:
        table[(l.video_id, l.model_id)][l.annotator_id] = l
    return table


def pair_vectors(
    labels: list[JudgmentLabel], ann_a: str, ann_b: str, metric: str
) -> tuple[list[bool], list[bool]]:
    """Aligned rating vectors over items both annotators judged."""
    if metric not in METRIC_FIELDS:
        raise StatsError(f"unknown metric {metric!r}")
    items = _by_item(dedupe_labels(labels))
    va, vb = [], []
    for item in sorted(items):
        raters = items[item]
        if ann_a in raters and ann_b in raters:
            va.append(getattr(raters[ann_a], metric))
            vb.append(getattr(raters[ann_b], metric))
    return va, vb


@dataclass(frozen=True)
class IaaReport:
    """Pairwise Cohen and Fleiss kappa, per metric plus pooled over metrics."""

    pairwise: dict[tuple[str, str], dict[str, float]]
    fleiss: dict[str, float]
    n_items_per_pair: dict[tuple[str, str], int]


def iaa_report(labels: list[JudgmentLabel]) -> IaaReport:
    deduped = dedupe_labels(labels)
    items = _by_item(deduped)
    annotators = sorted({l.annotator_id for l in deduped})
    pairwise: dict[tuple[str, str], dict[str, float]] = {}
    n_items: dict[tuple[str, str], int] = {}
    for i, a in enumerate(annotators):
        for b in annotators[i + 1 :]:
            shared = [it for it in sorted(items) if a in items[it] and b in items[it]]
            if not shared:
                continue
            scores = {}
            pooled_a: list[bool] = []
            pooled_b: list[bool] = []
            for metric in METRIC_FIELDS:
                va = [getattr(items[it][a], metric) for it in shared]
                vb = [getattr(items[it][b], metric) for it in shared]
                scores[metric] = cohens_kappa(va, vb)
                pooled_a.extend(va)
                pooled_b.extend(vb)
            scores["pooled"] = cohens_kappa(pooled_a, pooled_b)
            pairwise[(a, b)] = scores
            n_items[(a, b)] = len(shared)

    full = [it for it in sorted(items) if set(items[it]) >= set(annotators) and len(annotators) >= 2]
    fleiss: dict[str, float] = {}
    if full:
        pooled_rows = []
        for metric in METRIC_FIELDS:
            rows = []
            for it in full:
                votes = [getattr(items[it][a], metric) for a in annotators]
                rows.append([votes.count(False), votes.count(True)])
            fleiss[metric] = fleiss_kappa(rows)
            pooled_rows.extend(rows)
        fleiss["pooled"] = fleiss_kappa(pooled_rows)
    return IaaReport(pairwise=pairwise, fleiss=fleiss, n_items_per_pair=n_items)


def human_eval_summary(labels: list[JudgmentLabel]) -> dict[str, dict[str, float]]:
    """Per model, the fraction of positive judgments for each metric."""
    deduped = dedupe_labels(labels)
    if not deduped:
        raise StatsError("no labels to summarize")
    by_model: dict[str, list[JudgmentLabel]] = defaultdict(list)
    for l in deduped:
        by_model[l.model_id].append(l)
    out = {}
    for model, rows in sorted(by_model.items()):
        entry = {metric: sum(getattr(l, metric) for l in rows) / len(rows) for metric in METRIC_FIELDS}
        entry["n"] = len(rows)
        out[model] = entry
    return out
