"""Command-line entry point.

Verbs:
  validate     check corpus / annotations / prediction files
  stats        corpus means and histograms
  eval         score predictions and render the metric report
  iaa          inter-annotator agreement from labels or annotations
  correlate    Pearson between a score column and human judgments
  assign       deterministic annotation assignment plan
  serve        run the judgment-collection HTTP service
  plan-frames  frame-sampling timestamps for a duration
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import runner, server, stats
from .corpus import CorpusError, load_annotations, load_corpus, load_predictions, plan_frames, validate_predictions
from .embed import EmbeddingError

STORE_ENV_VAR = "METAPHOR_EVAL_STORE"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _parse_prediction_arg(value: str) -> tuple[str, int, str]:
    parts = value.split(":", 2)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected model:run:path, got {value!r}")
    model, run, path = parts
    try:
        run_id = int(run)
    except ValueError:
        raise argparse.ArgumentTypeError(f"run must be an integer in {value!r}")
    return model, run_id, path


def _add_predictions_flag(p: argparse.ArgumentParser, required: bool):
    p.add_argument(
        "--predictions",
        action="append",
        type=_parse_prediction_arg,
        default=[],
        required=required,
        metavar="MODEL:RUN:PATH",
        help="prediction file for one model run; repeatable",
    )


def cmd_validate(args) -> int:
    corpus = load_corpus(args.corpus)
    counts = corpus.split_counts
    print(f"corpus OK: {len(corpus)} videos (train {counts['train']} / val {counts['val']} / test {counts['test']})")
    for vid, token in corpus_mod.brand_warnings(corpus):
        print(f"WARN {vid}: caption mentions brand token {token!r}")
    if args.annotations:
        annotations = load_annotations(args.annotations)
        kept = corpus_mod.unanimity_filter(annotations)
        print(f"annotations OK: {len(annotations)} records, {len(kept)} unanimously metaphoric videos")
    for model, run, path in args.predictions:
        preds = load_predictions(path, model, run)
        missing = validate_predictions(corpus, preds)
        if missing:
            print(f"WARN {model} run {run}: {len(missing)} test videos missing predictions")
        else:
            print(f"predictions OK: {model} run {run} covers all test videos")
    return 0


def cmd_stats(args) -> int:
    result = corpus_mod.corpus_stats(load_corpus(args.corpus), args.duration_bin, args.length_bin)
    if args.format == "md":
        lines = [
            "# Corpus stats",
            "",
            f"- mean duration: {result.mean_duration_s:.2f} s",
            f"- mean caption length: {result.mean_caption_len_words:.2f} words",
            "",
            "| duration bin (s) | videos |",
            "|---|---|",
        ]
        lines += [f"| {k:g} | {v} |" for k, v in result.duration_histogram.items()]
        lines += ["", "| caption length (words) | captions |", "|---|---|"]
        lines += [f"| {k} | {v} |" for k, v in result.length_histogram.items()]
        _emit("\n".join(lines) + "\n", args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stat", "key", "value"])
        w.writerow(["mean_duration_s", "", f"{result.mean_duration_s:.6f}"])
        w.writerow(["mean_caption_len_words", "", f"{result.mean_caption_len_words:.6f}"])
        for k, v in result.duration_histogram.items():
            w.writerow(["duration_histogram", f"{k:g}", v])
        for k, v in result.length_histogram.items():
            w.writerow(["length_histogram", k, v])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(
            json.dumps(
                {
                    "mean_duration_s": result.mean_duration_s,
                    "mean_caption_len_words": result.mean_caption_len_words,
                    "duration_histogram": {f"{k:g}": v for k, v in result.duration_histogram.items()},
                    "length_histogram": {str(k): v for k, v in result.length_histogram.items()},
                },
                indent=2,
            ),
            args.out,
        )
    return 0


def cmd_eval(args) -> int:
    config = runner.JobConfig(
        corpus_path=args.corpus,
        predictions=tuple(args.predictions),
        provider_spec=args.provider,
        bleu_smooth=args.bleu_smooth,
        cider_d=args.cider_d,
        bertscore_idf=args.bertscore_idf,
        clamp_cs=args.clamp_cs,
        workers=args.workers,
    )
    reports, warns = runner.evaluate(config)
    for w in warns:
        print(w, file=sys.stderr)
    _emit(runner.RENDERERS[args.format](reports, warns), args.out)
    return 0


def _kappa_cell(value: float) -> str:
    return f"{value:.3f}"


def cmd_iaa(args) -> int:
    if bool(args.labels) == bool(args.annotations):
        print("error: provide exactly one of --labels or --annotations", file=sys.stderr)
        return 2
    if args.labels:
        labels = stats.labels_from_csv(Path(args.labels).read_text(encoding="utf-8"))
        report = stats.iaa_report(labels)
        if args.format == "json":
            payload = {
                "pairwise": {f"{a}|{b}": scores for (a, b), scores in report.pairwise.items()},
                "fleiss": report.fleiss,
                "n_items_per_pair": {f"{a}|{b}": n for (a, b), n in report.n_items_per_pair.items()},
            }
            _emit(json.dumps(payload, indent=2), args.out)
        else:
            metrics = list(stats.METRIC_FIELDS) + ["pooled"]
            lines = ["| Pair | " + " | ".join(metrics) + " | items |", "|" + "---|" * (len(metrics) + 2)]
            for (a, b), scores in sorted(report.pairwise.items()):
                cells = [_kappa_cell(scores[m]) for m in metrics]
                lines.append(f"| {a}-{b} | " + " | ".join(cells) + f" | {report.n_items_per_pair[(a, b)]} |")
            if report.fleiss:
                lines.append("")
                lines.append("| Fleiss | " + " | ".join(metrics) + " |")
                lines.append("|" + "---|" * (len(metrics) + 1))
                lines.append("| all raters | " + " | ".join(_kappa_cell(report.fleiss[m]) for m in metrics) + " |")
            _emit("\n".join(lines) + "\n", args.out)
    else:
        annotations = load_annotations(args.annotations)
        by_video: dict[str, dict[str, bool]] = {}
        for rec in annotations:
            by_video.setdefault(rec.video_id, {})[rec.annotator_id] = rec.is_metaphor
        annotators = sorted({rec.annotator_id for rec in annotations})
        lines = ["| Pair | kappa | items |", "|---|---|---|"]
        payload: dict = {"pairwise": {}, "fleiss": None}
        for i, a in enumerate(annotators):
            for b in annotators[i + 1 :]:
                shared = [v for v in sorted(by_video) if a in by_video[v] and b in by_video[v]]
                if not shared:
                    continue
                kappa = stats.cohens_kappa(
                    [by_video[v][a] for v in shared], [by_video[v][b] for v in shared]
                )
                payload["pairwise"][f"{a}|{b}"] = kappa
                lines.append(f"| {a}-{b} | {_kappa_cell(kappa)} | {len(shared)} |")
        full = [v for v in sorted(by_video) if set(by_video[v]) >= set(annotators)]
        if full and len(annotators) >= 2:
            rows = []
            for v in full:
                votes = [by_video[v][a] for a in annotators]
                rows.append([votes.count(False), votes.count(True)])
            payload["fleiss"] = stats.fleiss_kappa(rows)
            lines.append(f"| all ({len(annotators)} raters, Fleiss) | {_kappa_cell(payload['fleiss'])} | {len(full)} |")
        if args.format == "json":
            _emit(json.dumps(payload, indent=2), args.out)
        else:
            _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_correlate(args) -> int:
    labels = stats.labels_from_csv(Path(args.labels).read_text(encoding="utf-8"))
    votes: dict[tuple[str, str], list[bool]] = {}
    for label in stats.dedupe_labels(labels):
        votes.setdefault((label.video_id, label.model_id), []).append(getattr(label, args.human_metric))
    scores: dict[tuple[str, str], float] = {}
    with open(args.scores, encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if not {"video_id", "model_id", "score"} <= set(reader.fieldnames or []):
            print("error: scores file needs columns video_id,model_id,score", file=sys.stderr)
            return 2
        for row in reader:
            scores[(row["video_id"], row["model_id"])] = float(row["score"])
    keys = sorted(set(votes) & set(scores))
    if len(keys) < 2:
        print("error: fewer than 2 joined items between labels and scores", file=sys.stderr)
        return 2
    xs = [scores[k] for k in keys]
    ys = [sum(votes[k]) / len(votes[k]) for k in keys]
    r, p = stats.pearson(xs, ys)
    if args.format == "json":
        _emit(json.dumps({"r": r, "p": p, "n": len(keys), "human_metric": args.human_metric}, indent=2), args.out)
    else:
        _emit(f"pearson r = {r:.4f} (p = {p:.3e}, n = {len(keys)}, human metric = {args.human_metric})", args.out)
    return 0


def cmd_assign(args) -> int:
    if bool(args.corpus) == bool(args.videos):
        print("error: provide exactly one of --corpus or --videos", file=sys.stderr)
        return 2
    if args.corpus:
        videos = sorted(load_corpus(args.corpus).split_ids(args.split))
    else:
        videos = [line.strip() for line in Path(args.videos).read_text(encoding="utf-8").splitlines() if line.strip()]
    annotators = [a.strip() for a in args.annotators.split(",") if a.strip()]
    plan = runner.assign(videos, annotators, args.n_per, args.n_shared, args.seed)
    _emit(
        json.dumps(
            {
                "seed": plan.seed,
                "shared": list(plan.shared),
                "per_annotator": {a: list(v) for a, v in plan.per_annotator.items()},
            },
            indent=2,
        ),
        args.out,
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    store = args.store or os.environ.get(STORE_ENV_VAR) or "labels.jsonl"
    config = server.ServeConfig(
        corpus_path=args.corpus,
        predictions=tuple(args.predictions),
        annotators=tuple(a.strip() for a in args.annotators.split(",") if a.strip()),
        n_per_annotator=args.n_per,
        n_shared=args.n_shared,
        seed=args.seed,
        store_path=store,
        blind=args.blind,
        ui_dir=args.ui_dir,
    )
    app = server.build_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_plan_frames(args) -> int:
    plan = plan_frames(args.duration, args.strategy, args.clips)
    _emit(
        json.dumps(
            {"strategy": plan.strategy, "clips": plan.clips, "timestamps_s": list(plan.timestamps_s)},
            indent=2,
        ),
        args.out,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metaphor-eval", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    def common_out(p):
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=("md", "csv", "json"), default="md")

    p = sub.add_parser("validate", help="check corpus, annotations, and prediction files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations")
    _add_predictions_flag(p, required=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="corpus means and histograms")
    p.add_argument("--corpus", required=True)
    p.add_argument("--duration-bin", type=float, default=10.0)
    p.add_argument("--length-bin", type=int, default=1)
    common_out(p)
    p.set_defaults(func=cmd_stats, format="json")

    p = sub.add_parser("eval", help="score predictions and render the metric report")
    p.add_argument("--corpus", required=True)
    _add_predictions_flag(p, required=True)
    p.add_argument("--provider", default="test:0", help="file:PATH | http:URL | test:SEED")
    p.add_argument("--bleu-smooth", action="store_true")
    p.add_argument("--cider-d", action="store_true")
    p.add_argument("--bertscore-idf", action="store_true")
    p.add_argument("--clamp-cs", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--workers", type=int, default=1)
    common_out(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("iaa", help="inter-annotator agreement")
    p.add_argument("--labels", help="judgment CSV exported from the server")
    p.add_argument("--annotations", help="annotation JSONL (agreement on is_metaphor)")
    common_out(p)
    p.set_defaults(func=cmd_iaa)

    p = sub.add_parser("correlate", help="Pearson between scores and human judgments")
    p.add_argument("--labels", required=True, help="judgment CSV")
    p.add_argument("--scores", required=True, help="CSV with video_id,model_id,score")
    p.add_argument("--human-metric", choices=stats.METRIC_FIELDS, default="creativity")
    common_out(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("assign", help="deterministic annotation assignment")
    p.add_argument("--corpus")
    p.add_argument("--videos", help="text file with one video id per line")
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.add_argument("--annotators", required=True, help="comma-separated ids")
    p.add_argument("--n-per", type=int, required=True)
    p.add_argument("--n-shared", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("serve", help="run the judgment-collection HTTP service")
    p.add_argument("--corpus", required=True)
    _add_predictions_flag(p, required=True)
    p.add_argument("--annotators", required=True, help="comma-separated ids")
    p.add_argument("--n-per", type=int, required=True)
    p.add_argument("--n-shared", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", help=f"label store path (default ${STORE_ENV_VAR} or labels.jsonl)")
    p.add_argument("--blind", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--ui-dir", help="directory with the built annotation UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("plan-frames", help="frame-sampling timestamps for a duration")
    p.add_argument("--duration", type=float, required=True)
    p.add_argument(
        "--strategy", choices=(corpus_mod.THREE_SEGMENT, corpus_mod.CLIP_SPLIT), default=corpus_mod.THREE_SEGMENT
    )
    p.add_argument("--clips", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan_frames)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, EmbeddingError, stats.StatsError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
