"""Evaluation orchestration: score prediction files, average runs, render reports.

A report row per model carries six columns (bleu4, rouge_l, cider, bert_f1,
acs, acd) with per-run values and their mean.  All columns are
higher-is-better except acs.  Models are ranked by mean acd.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import ngram, semantic
from .corpus import Corpus, load_corpus, load_predictions, validate_predictions
from .embed import CachingProvider, ProviderDescriptor, make_provider

COLUMNS = ("bleu4", "rouge_l", "cider", "bert_f1", "acs", "acd")
LOWER_IS_BETTER = frozenset({"acs"})
COLUMN_LABELS = {
    "bleu4": "BLEU-4",
    "rouge_l": "ROUGE-L",
    "cider": "CIDEr",
    "bert_f1": "BERT-F1",
    "acs": "ACS ↓",
    "acd": "ACD",
}
_MEAN_TOL = 1e-12


@dataclass(frozen=True)
class ColumnStat:
    mean: float
    per_run: tuple[float, ...]

    def check(self, name: str):
        recomputed = sum(self.per_run) / len(self.per_run)
        if abs(self.mean - recomputed) > _MEAN_TOL:
            raise ValueError(f"column {name}: stored mean {self.mean!r} != recomputed {recomputed!r}")


@dataclass(frozen=True)
class MetricReport:
    model_id: str
    runs: tuple[int, ...]
    columns: dict[str, ColumnStat]
    provider: ProviderDescriptor
    coverage: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class JobConfig:
    corpus_path: str
    predictions: tuple[tuple[str, int, str], ...]  # (model_id, run_id, path)
    provider_spec: str = "test:0"
    bleu_smooth: bool = False
    cider_d: bool = False
    bertscore_idf: bool = False
    clamp_cs: bool = True
    workers: int = 1

    def validated(self) -> "JobConfig":
        if not Path(self.corpus_path).exists():
            raise FileNotFoundError(self.corpus_path)
        if not self.predictions:
            raise ValueError("need at least one --predictions entry")
        seen = set()
        for model, run, path in self.predictions:
            if (model, run) in seen:
                raise ValueError(f"duplicate prediction entry for {model} run {run}")
            seen.add((model, run))
            if not Path(path).exists():
                raise FileNotFoundError(path)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self


def _score_run(corpus: Corpus, preds, provider, config: JobConfig):
    missing = validate_predictions(corpus, preds)
    if not preds.items:
        raise ValueError(f"{preds.model_id} run {preds.run_id} has no predictions")
    vids = sorted(preds.items)
    hyps = [preds.items[v] for v in vids]
    refs = [list(corpus.captions[v].references) for v in vids]
    sem = semantic.acd_report(
        vids,
        hyps,
        refs,
        provider,
        clamp_cs=config.clamp_cs,
        use_idf=config.bertscore_idf,
        workers=config.workers,
    )
    values = {
        "bleu4": ngram.bleu4(hyps, refs, smooth=config.bleu_smooth).value,
        "rouge_l": ngram.rouge_l(hyps, refs).value,
        "cider": ngram.cider(hyps, refs, use_d=config.cider_d).value,
        "bert_f1": sum(r.f1 for r in sem.per_caption) / sem.n,
        "acs": sem.acs,
        "acd": sem.acd,
    }
    return values, missing


def evaluate(config: JobConfig) -> tuple[list[MetricReport], list[str]]:
    """Score every prediction file and aggregate per model.

    Returns the per-model reports sorted by mean acd (descending; ties by
    model id) and the coverage warnings gathered along the way.  Videos
    outside the test split are an error; test videos without a prediction
    only warn, with the metric computed over the covered subset.
    """
    config = config.validated()
    corpus = load_corpus(config.corpus_path)
    n_test = len(corpus.split_ids("test"))
    provider = CachingProvider(make_provider(config.provider_spec))
    warnings: list[str] = []
    by_model: dict[str, dict[int, dict[str, float]]] = {}
    coverage: dict[str, dict[int, float]] = {}
    for model, run, path in sorted(config.predictions):
        preds = load_predictions(path, model, run)
        values, missing = _score_run(corpus, preds, provider, config)
        if missing:
            covered = n_test - len(missing)
            warnings.append(
                f"WARN {model} run {run}: {len(missing)} of {n_test} test videos have no "
                f"prediction; metrics cover {covered} videos ({100.0 * covered / n_test:.1f}%)"
            )
        by_model.setdefault(model, {})[run] = values
        coverage.setdefault(model, {})[run] = (n_test - len(missing)) / n_test
    reports = []
    for model, runs in by_model.items():
        run_ids = tuple(sorted(runs))
        columns = {}
        for name in COLUMNS:
            per_run = tuple(runs[r][name] for r in run_ids)
            columns[name] = ColumnStat(sum(per_run) / len(per_run), per_run)
        reports.append(
            MetricReport(
                model_id=model,
                runs=run_ids,
                columns=columns,
                provider=provider.descriptor,
                coverage=coverage[model],
            )
        )
    reports.sort(key=lambda r: (-r.columns["acd"].mean, r.model_id))
    return reports, warnings


def _check_reports(reports: list[MetricReport]):
    if not reports:
        raise ValueError("nothing to render")
    for report in reports:
        if set(report.columns) != set(COLUMNS):
            raise ValueError(f"report for {report.model_id} is missing columns")
        for name, stat in report.columns.items():
            stat.check(f"{report.model_id}.{name}")
            if len(stat.per_run) != len(report.runs):
                raise ValueError(f"{report.model_id}.{name}: per-run values do not match run ids")


def _rank_marks(reports: list[MetricReport], name: str) -> dict[str, str]:
    """model_id -> 'best' | 'second' by column mean, direction-aware."""
    values = sorted({round(r.columns[name].mean, 12) for r in reports}, reverse=name not in LOWER_IS_BETTER)
    marks = {}
    for report in reports:
        v = round(report.columns[name].mean, 12)
        if v == values[0]:
            marks[report.model_id] = "best"
        elif len(values) > 1 and v == values[1]:
            marks[report.model_id] = "second"
    return marks


def render_markdown(reports: list[MetricReport], warnings: list[str] = ()) -> str:
    """Table-1 styled report: one row per model, best bold, runner-up underlined."""
    _check_reports(reports)
    provider = reports[0].provider
    lines = ["# Metric report", ""]
    lines.append(f"Provider: {provider.kind} ({provider.model_name}, dim {provider.dim})")
    lines.append("")
    for w in warnings:
        lines.append(f"> {w}")
    if warnings:
        lines.append("")
    marks = {name: _rank_marks(reports, name) for name in COLUMNS}
    header = ["Model", "Runs"] + [COLUMN_LABELS[c] for c in COLUMNS]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for report in reports:
        cells = [report.model_id, str(len(report.runs))]
        for name in COLUMNS:
            decimals = 2
            text = f"{report.columns[name].mean:.{decimals}f}"
            mark = marks[name].get(report.model_id)
            if mark == "best":
                text = f"**{text}**"
            elif mark == "second":
                text = f"<u>{text}</u>"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    return "\n".join(lines)


def render_csv(reports: list[MetricReport]) -> str:
    _check_reports(reports)
    lines = ["model_id,run_id," + ",".join(COLUMNS)]
    for report in reports:
        for i, run in enumerate(report.runs):
            row = [report.model_id, str(run)] + [f"{report.columns[c].per_run[i]:.6f}" for c in COLUMNS]
            lines.append(",".join(row))
        mean_row = [report.model_id, "mean"] + [f"{report.columns[c].mean:.6f}" for c in COLUMNS]
        lines.append(",".join(mean_row))
    return "\n".join(lines) + "\n"


def render_json(reports: list[MetricReport], warnings: list[str] = ()) -> str:
    _check_reports(reports)
    provider = reports[0].provider
    payload = {
        "provider": {"kind": provider.kind, "model_name": provider.model_name, "dim": provider.dim},
        "warnings": list(warnings),
        "models": [
            {
                "model_id": r.model_id,
                "runs": list(r.runs),
                "coverage": {str(k): v for k, v in sorted(r.coverage.items())},
                "columns": {
                    name: {"mean": stat.mean, "per_run": list(stat.per_run)}
                    for name, stat in ((n, r.columns[n]) for n in COLUMNS)
                },
            }
            for r in reports
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


RENDERERS = {"md": render_markdown, "csv": lambda reports, warnings=(): render_csv(reports), "json": render_json}


@dataclass(frozen=True)
class Assignment:
    """Who labels which videos: one shared block plus disjoint private blocks."""

    shared: tuple[str, ...]
    per_annotator: dict[str, tuple[str, ...]]
    seed: int

    def overlap(self, a: str, b: str) -> int:
        return len(set(self.per_annotator[a]) & set(self.per_annotator[b]))


def assign(
    videos: list[str], annotators: list[str], n_per_annotator: int, n_shared: int, seed: int
) -> Assignment:
    """Deterministic annotation assignment.

    Every annotator gets the same ``n_shared`` shared videos (for agreement
    measurement) plus a private disjoint block filling up to
    ``n_per_annotator``.
    """
    if not annotators:
        raise ValueError("need at least one annotator")
    if len(set(annotators)) != len(annotators):
        raise ValueError("annotator ids must be unique")
    if n_shared < 0 or n_per_annotator <= 0 or n_shared > n_per_annotator:
        raise ValueError(f"infeasible assignment: {n_per_annotator} per annotator, {n_shared} shared")
    unique = sorted(set(videos))
    if len(unique) != len(videos):
        raise ValueError("video ids must be unique")
    needed = n_shared + len(annotators) * (n_per_annotator - n_shared)
    if needed > len(unique):
        raise ValueError(f"need {needed} distinct videos, only {len(unique)} available")
    rng = random.Random(seed)
    shuffled = unique[:]
    rng.shuffle(shuffled)
    shared = tuple(shuffled[:n_shared])
    per: dict[str, tuple[str, ...]] = {}
    cursor = n_shared
    private_size = n_per_annotator - n_shared
    for ann in annotators:
        block = tuple(shuffled[cursor : cursor + private_size])
        cursor += private_size
        per[ann] = shared + block
    return Assignment(shared=shared, per_annotator=per, seed=seed)
