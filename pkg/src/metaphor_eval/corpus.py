"""VMCD-format corpus handling: loading, validation, statistics, frame plans.

File formats (one JSON object per line, UTF-8):

* ``corpus.jsonl`` — {video_id, source_url, duration_s, split, references[3]}
* ``annotations.jsonl`` — one record per (video, annotator) with the full
  annotation questionnaire (see :class:`AnnotationRecord`)
* ``predictions.<model>.<run>.jsonl`` — {video_id, caption}

Corpus objects are immutable after loading and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import template

SPLITS = ("train", "val", "test")

THREE_SEGMENT = "three_segment"
CLIP_SPLIT = "clip_split"
CLIP_COUNTS = (1, 2, 4, 6)

# Tokens the annotation guidelines ask to replace with common nouns.  A hit
# is a warning, not an error: the guideline is an instruction to annotators,
# not a machine-checkable rule.
BRAND_TOKENS = frozenset(
    {
        "coke", "pepsi", "nike", "adidas", "reebok", "puma", "gucci",
        "samsung", "iphone", "ipad", "macbook", "xbox", "playstation",
        "toyota", "honda", "bmw", "audi", "mercedes", "ferrari", "tesla",
        "mcdonalds", "starbucks", "netflix", "youtube", "facebook",
        "instagram", "twitter", "google", "amazon", "microsoft", "lego",
        "cadbury", "nestle", "heineken", "budweiser", "messi", "ronaldo",
    }
)


class CorpusError(ValueError):
    """Invalid corpus, annotation, or prediction data."""


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    source_url: str
    duration_s: float
    split: str


@dataclass(frozen=True)
class CaptionSet:
    video_id: str
    references: tuple[str, str, str]


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's full questionnaire for one video (questions a-h)."""

    video_id: str
    annotator_id: str
    is_metaphor: bool
    audio_required: bool
    metaphor_span: str
    primary_concept: str
    secondary_concept: str
    shared_property: str
    template_caption: str
    free_description: str


@dataclass(frozen=True)
class PredictionSet:
    """One model run's predicted captions, keyed by video id."""

    model_id: str
    run_id: int
    items: dict[str, str]

    def __post_init__(self):
        if self.run_id < 1:
            raise CorpusError(f"run_id must be >= 1, got {self.run_id}")


@dataclass(frozen=True)
class Corpus:
    videos: dict[str, VideoRecord]
    captions: dict[str, CaptionSet]

    def __len__(self) -> int:
        return len(self.videos)

    @property
    def split_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(SPLITS, 0)
        for v in self.videos.values():
            counts[v.split] += 1
        return counts

    @property
    def caption_counts(self) -> dict[str, int]:
        return {s: 3 * n for s, n in self.split_counts.items()}

    def split_ids(self, split: str) -> list[str]:
        return [vid for vid, v in self.videos.items() if v.split == split]


def _iter_jsonl(path: str | Path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}, line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}, line {lineno}: expected an object")
            yield lineno, obj


def _require(obj: dict, key: str, path, lineno):
    if key not in obj:
        raise CorpusError(f"{path}, line {lineno}: missing field {key!r}")
    return obj[key]


def load_corpus(index_path: str | Path) -> Corpus:
    """Load and validate a corpus index file.

    Raises :class:`CorpusError` with the offending line number on duplicate
    video ids, caption count != 3, unknown split values, or nonpositive
    durations.  An empty file yields an empty corpus.
    """
    videos: dict[str, VideoRecord] = {}
    captions: dict[str, CaptionSet] = {}
    for lineno, obj in _iter_jsonl(index_path):
        vid = str(_require(obj, "video_id", index_path, lineno))
        if vid in videos:
            raise CorpusError(f"{index_path}, line {lineno}: duplicate video_id {vid!r}")
        duration = _require(obj, "duration_s", index_path, lineno)
        if not isinstance(duration, (int, float)) or not math.isfinite(duration) or duration <= 0:
            raise CorpusError(f"{index_path}, line {lineno}: duration_s must be a positive number")
        split = _require(obj, "split", index_path, lineno)
        if split not in SPLITS:
            raise CorpusError(f"{index_path}, line {lineno}: unknown split {split!r}")
        refs = _require(obj, "references", index_path, lineno)
        if not isinstance(refs, list) or len(refs) != 3:
            raise CorpusError(
                f"{index_path}, line {lineno}: caption count must be exactly 3, "
                f"got {len(refs) if isinstance(refs, list) else type(refs).__name__}"
            )
        stripped = tuple(str(r).strip() for r in refs)
        if any(not r for r in stripped):
            raise CorpusError(f"{index_path}, line {lineno}: empty reference caption")
        videos[vid] = VideoRecord(vid, str(obj.get("source_url", "")), float(duration), split)
        captions[vid] = CaptionSet(vid, stripped)
    return Corpus(videos=videos, captions=captions)


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Load annotation records; template captions must parse for metaphors."""
    records = []
    for lineno, obj in _iter_jsonl(path):
        rec = AnnotationRecord(
            video_id=str(_require(obj, "video_id", path, lineno)),
            annotator_id=str(_require(obj, "annotator_id", path, lineno)),
            is_metaphor=bool(_require(obj, "is_metaphor", path, lineno)),
            audio_required=bool(obj.get("audio_required", False)),
            metaphor_span=str(obj.get("metaphor_span", "")),
            primary_concept=str(obj.get("primary_concept", "")),
            secondary_concept=str(obj.get("secondary_concept", "")),
            shared_property=str(obj.get("shared_property", "")),
            template_caption=str(obj.get("template_caption", "")),
            free_description=str(obj.get("free_description", "")),
        )
        if rec.is_metaphor and not template.parse_caption(rec.template_caption).ok:
            raise CorpusError(
                f"{path}, line {lineno}: template_caption does not parse for metaphor "
                f"video {rec.video_id!r}"
            )
        records.append(rec)
    return records


def load_predictions(path: str | Path, model_id: str, run_id: int) -> PredictionSet:
    items: dict[str, str] = {}
    for lineno, obj in _iter_jsonl(path):
        vid = str(_require(obj, "video_id", path, lineno))
        if vid in items:
            raise CorpusError(f"{path}, line {lineno}: duplicate prediction for {vid!r}")
        items[vid] = str(_require(obj, "caption", path, lineno))
    return PredictionSet(model_id=model_id, run_id=run_id, items=items)


def validate_predictions(corpus: Corpus, preds: PredictionSet) -> list[str]:
    """Check predictions against the corpus test split.

    Unknown or non-test video ids are errors; returns the (possibly empty)
    sorted list of test videos with no prediction, which callers may warn
    about rather than fail on.
    """
    test_ids = set(corpus.split_ids("test"))
    unknown = sorted(set(preds.items) - test_ids)
    if unknown:
        raise CorpusError(
            f"predictions for {preds.model_id} run {preds.run_id} reference "
            f"video ids outside the test split: {', '.join(unknown[:5])}"
            + ("..." if len(unknown) > 5 else "")
        )
    return sorted(test_ids - set(preds.items))


def unanimity_filter(annotations: list[AnnotationRecord]) -> list[str]:
    """Video ids all three annotators marked as metaphoric.

    Every video present must carry exactly 3 annotation records; output
    preserves first-seen order.
    """
    by_video: dict[str, list[AnnotationRecord]] = {}
    for rec in annotations:
        by_video.setdefault(rec.video_id, []).append(rec)
    kept = []
    for vid, recs in by_video.items():
        if len(recs) != 3:
            raise CorpusError(f"video {vid!r} has {len(recs)} annotation records, expected 3")
        if all(r.is_metaphor for r in recs):
            kept.append(vid)
    return kept


def brand_warnings(corpus: Corpus) -> list[tuple[str, str]]:
    """(video_id, token) pairs where a caption contains a known brand token."""
    hits = []
    for vid, cs in corpus.captions.items():
        for ref in cs.references:
            for w in ref.lower().split():
                w = w.strip(".,!?;:\"'")
                if w in BRAND_TOKENS:
                    hits.append((vid, w))
    return hits


@dataclass(frozen=True)
class CorpusStats:
    mean_duration_s: float
    mean_caption_len_words: float
    duration_histogram: dict[float, int]
    length_histogram: dict[int, int]


def corpus_stats(corpus: Corpus, duration_bin_s: float = 10.0, length_bin_words: int = 1) -> CorpusStats:
    """Means and histograms over all videos and captions.

    Histogram keys are bin lower bounds (``floor(x / width) * width``).
    """
    if not corpus.videos:
        raise CorpusError("corpus_stats requires a non-empty corpus")
    durations = [v.duration_s for v in corpus.videos.values()]
    lengths = [len(ref.split()) for cs in corpus.captions.values() for ref in cs.references]
    dur_hist = Counter(math.floor(d / duration_bin_s) * duration_bin_s for d in durations)
    len_hist = Counter(math.floor(n / length_bin_words) * length_bin_words for n in lengths)
    return CorpusStats(
        mean_duration_s=sum(durations) / len(durations),
        mean_caption_len_words=sum(lengths) / len(lengths),
        duration_histogram=dict(sorted(dur_hist.items())),
        length_histogram=dict(sorted(len_hist.items())),
    )


@dataclass(frozen=True)
class FramePlan:
    """Sampling timestamps for one video; strictly increasing, in [0, D]."""

    timestamps_s: tuple[float, ...]
    strategy: str
    clips: int = 1

    @property
    def groups(self) -> list[tuple[float, ...]]:
        """Timestamps grouped per clip (6 per group)."""
        return [self.timestamps_s[i : i + 6] for i in range(0, len(self.timestamps_s), 6)]


def _six_frames(start: float, length: float) -> list[float]:
    # two frames per third of the window, at that segment's 1/3 and 2/3 points
    seg = length / 3.0
    out = []
    for i in range(3):
        base = start + i * seg
        out.append(base + seg / 3.0)
        out.append(base + 2.0 * seg / 3.0)
    return out


def plan_frames(duration_s: float, strategy: str = THREE_SEGMENT, clips: int = 1) -> FramePlan:
    """Frame-sampling plan over [0, duration].

    ``three_segment`` emits 6 timestamps (2 per third of the video);
    ``clip_split`` divides the video into ``clips`` equal clips (1, 2, 4, or
    6) and applies the 6-frame rule inside each.
    """
    if not (isinstance(duration_s, (int, float)) and math.isfinite(duration_s) and duration_s > 0):
        raise ValueError(f"duration_s must be positive, got {duration_s!r}")
    if strategy == THREE_SEGMENT:
        ts = _six_frames(0.0, float(duration_s))
        clips = 1
    elif strategy == CLIP_SPLIT:
        if clips not in CLIP_COUNTS:
            raise ValueError(f"clip_split supports clips in {CLIP_COUNTS}, got {clips}")
        clip_len = float(duration_s) / clips
        ts = []
        for j in range(clips):
            ts.extend(_six_frames(j * clip_len, clip_len))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] < 0 or ts[-1] > duration_s:
        raise ValueError(f"degenerate frame plan for duration {duration_s!r}")
    return FramePlan(timestamps_s=tuple(ts), strategy=strategy, clips=clips)
