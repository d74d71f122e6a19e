"""Judgment-collection HTTP service.

Serves (video, model-caption) tasks to annotators according to a
deterministic assignment plan, appends their four binary judgments to a
JSONL store, and exports the deduplicated labels as CSV.  One process owns
the store file; writes are serialized with a lock.

In blind mode (the default) task payloads never include the model id; the
client submits by opaque task id and the server resolves it.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import Corpus, load_corpus, load_predictions
from .runner import Assignment, assign
from .stats import JudgmentLabel, dedupe_labels, labels_to_csv, now_iso


@dataclass(frozen=True)
class Task:
    task_id: str
    video_id: str
    model_id: str
    caption: str
    video_url: str


def task_id_for(video_id: str, model_id: str) -> str:
    # opaque on purpose: a readable id would leak the model in blind mode
    return hashlib.sha1(f"{video_id}|{model_id}".encode("utf-8")).hexdigest()[:12]


class LabelStore:
    """Append-only JSONL label log; reads collapse to last-write-wins."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._rows: list[JudgmentLabel] = []
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                for lineno, line in enumerate(f, start=1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                        self._rows.append(JudgmentLabel(**obj))
                    except (json.JSONDecodeError, TypeError) as exc:
                        raise ValueError(f"{self.path}, line {lineno}: bad label row: {exc}") from exc

    def append(self, label: JudgmentLabel):
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(label.__dict__) + "\n")
            self._rows.append(label)

    def labels(self) -> list[JudgmentLabel]:
        with self._lock:
            return dedupe_labels(self._rows)


@dataclass(frozen=True)
class ServeConfig:
    corpus_path: str
    predictions: tuple[tuple[str, int, str], ...]
    annotators: tuple[str, ...]
    n_per_annotator: int
    n_shared: int
    seed: int
    store_path: str
    blind: bool = True
    ui_dir: str | None = None


class LabelIn(BaseModel):
    annotator_id: str
    fluency: bool
    creativity: bool
    pcc: bool
    consistency: bool
    task_id: str | None = None
    video_id: str | None = None
    model_id: str | None = None


def _build_tasks(corpus: Corpus, prediction_sets) -> tuple[dict[str, Task], list[str]]:
    """Tasks for every (covered test video, model); returns (by id, eligible video ids)."""
    models = {}
    for preds in prediction_sets:
        if preds.model_id in models:
            raise ValueError(f"serve expects one run per model, got {preds.model_id} twice")
        models[preds.model_id] = preds
    test_ids = set(corpus.split_ids("test"))
    eligible = sorted(v for v in test_ids if all(v in p.items for p in models.values()))
    if not eligible:
        raise ValueError("no test video is covered by every model's predictions")
    tasks = {}
    for vid in eligible:
        for model_id in sorted(models):
            tid = task_id_for(vid, model_id)
            tasks[tid] = Task(
                task_id=tid,
                video_id=vid,
                model_id=model_id,
                caption=models[model_id].items[vid],
                video_url=corpus.videos[vid].source_url,
            )
    return tasks, eligible


def build_app(config: ServeConfig) -> FastAPI:
    corpus = load_corpus(config.corpus_path)
    prediction_sets = [load_predictions(path, model, run) for model, run, path in config.predictions]
    tasks, eligible = _build_tasks(corpus, prediction_sets)
    plan = assign(eligible, list(config.annotators), config.n_per_annotator, config.n_shared, config.seed)
    store = LabelStore(config.store_path)
    model_ids = sorted({t.model_id for t in tasks.values()})

    # per annotator, the deterministic task order they walk through
    queue: dict[str, list[str]] = {
        ann: [task_id_for(vid, model) for vid in videos for model in model_ids]
        for ann, videos in plan.per_annotator.items()
    }

    app = FastAPI(title="metaphor-eval judgments")
    app.state.store = store
    app.state.plan = plan

    def labeled_keys(annotator: str) -> set[tuple[str, str]]:
        return {(l.video_id, l.model_id) for l in store.labels() if l.annotator_id == annotator}

    def progress_for(annotator: str) -> dict:
        done = labeled_keys(annotator)
        labeled = sum(1 for tid in queue[annotator] if (tasks[tid].video_id, tasks[tid].model_id) in done)
        return {"assigned": len(queue[annotator]), "labeled": labeled}

    def task_payload(task: Task, annotator: str | None = None) -> dict:
        payload = {
            "task_id": task.task_id,
            "video_id": task.video_id,
            "video_url": task.video_url,
            "caption": task.caption,
            "blind": config.blind,
        }
        if not config.blind:
            payload["model_id"] = task.model_id
        if annotator is not None:
            payload["annotator_id"] = annotator
            payload["progress"] = progress_for(annotator)
        return payload

    @app.get("/api/tasks/next")
    def next_task(annotator: str):
        if annotator not in queue:
            raise HTTPException(404, f"unknown annotator {annotator!r}")
        done = labeled_keys(annotator)
        for tid in queue[annotator]:
            task = tasks[tid]
            if (task.video_id, task.model_id) not in done:
                return task_payload(task, annotator)
        return {"task_id": None, "done": True, "annotator_id": annotator, "progress": progress_for(annotator)}

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        if task_id not in tasks:
            raise HTTPException(404, f"unknown task {task_id!r}")
        return task_payload(tasks[task_id])

    @app.post("/api/labels")
    def post_label(body: LabelIn):
        if body.task_id is not None:
            if body.task_id not in tasks:
                raise HTTPException(404, f"unknown task {body.task_id!r}")
            task = tasks[body.task_id]
            video_id, model_id = task.video_id, task.model_id
        elif body.video_id is not None and body.model_id is not None:
            video_id, model_id = body.video_id, body.model_id
            if task_id_for(video_id, model_id) not in tasks:
                raise HTTPException(404, f"no task for video {video_id!r} and that model")
        else:
            raise HTTPException(422, "provide either task_id or video_id + model_id")
        if body.annotator_id not in queue:
            raise HTTPException(404, f"unknown annotator {body.annotator_id!r}")
        store.append(
            JudgmentLabel(
                video_id=video_id,
                model_id=model_id,
                annotator_id=body.annotator_id,
                fluency=body.fluency,
                creativity=body.creativity,
                primary_concept_consistency=body.pcc,
                consistency=body.consistency,
                timestamp=now_iso(),
            )
        )
        return {"ok": True, "progress": progress_for(body.annotator_id)}

    @app.get("/api/progress")
    def progress(annotator: str | None = None):
        if annotator is not None:
            if annotator not in queue:
                raise HTTPException(404, f"unknown annotator {annotator!r}")
            return progress_for(annotator)
        return {
            "annotators": {ann: progress_for(ann) for ann in sorted(queue)},
            "total_labeled": len(store.labels()),
            "models": len(model_ids),
        }

    @app.get("/api/export.csv", response_class=PlainTextResponse)
    def export_csv():
        return PlainTextResponse(labels_to_csv(store.labels()), media_type="text/csv")

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")
    return app
