/**
 * Entry point: wires the api client, the task card, the outbox, and the
 * progress dashboard together against the real browser environment.
 */

import { ApiClient, type LabelSubmission, type TaskView } from "./api.js";
import { flushOutbox, outboxSize, pushOutbox } from "./outbox.js";
import { renderProgress } from "./progress.js";
import { renderDone, renderTask, setTaskStatus, type Votes } from "./task.js";

const api = new ApiClient();

function annotatorFromUrl(): string | null {
  return new URLSearchParams(window.location.search).get("annotator");
}

async function refreshProgress(container: HTMLElement): Promise<void> {
  try {
    renderProgress(container, await api.progress());
  } catch {
    renderProgress(container, null);
  }
}

async function submitOrQueue(label: LabelSubmission): Promise<boolean> {
  try {
    await api.postLabel(label);
    return true;
  } catch {
    pushOutbox(window.localStorage, label);
    return false;
  }
}

async function loadNext(taskEl: HTMLElement, progressEl: HTMLElement, annotator: string): Promise<void> {
  let task: TaskView;
  try {
    task = await api.nextTask(annotator);
  } catch {
    renderProgress(progressEl, null);
    setTimeout(() => void loadNext(taskEl, progressEl, annotator), 5000);
    return;
  }
  if (task.task_id === null) {
    renderDone(taskEl, task.progress?.labeled ?? 0);
    void refreshProgress(progressEl);
    return;
  }
  renderTask(taskEl, task, {
    onSubmit: (votes: Votes) => void handleSubmit(taskEl, progressEl, annotator, task, votes),
  });
  const queued = outboxSize(window.localStorage);
  if (queued > 0) {
    setTaskStatus(taskEl, `${queued} unsent label${queued === 1 ? "" : "s"} waiting locally.`, {
      retry: () => void retryOutbox(taskEl),
    });
  }
}

async function handleSubmit(
  taskEl: HTMLElement,
  progressEl: HTMLElement,
  annotator: string,
  task: TaskView,
  votes: Votes,
): Promise<void> {
  const label: LabelSubmission = {
    task_id: task.task_id as string,
    annotator_id: annotator,
    ...votes,
  };
  const delivered = await submitOrQueue(label);
  if (!delivered) {
    setTaskStatus(taskEl, "Could not reach the server; the label is saved locally.", {
      retry: () => void retryOutbox(taskEl),
    });
  }
  void refreshProgress(progressEl);
  // move on either way: the queued copy is flushed on retry or next load
  void loadNext(taskEl, progressEl, annotator);
}

async function retryOutbox(taskEl: HTMLElement): Promise<void> {
  const sent = await flushOutbox(window.localStorage, async (label) => {
    await api.postLabel(label);
  });
  const left = outboxSize(window.localStorage);
  setTaskStatus(taskEl, left === 0 ? `Delivered ${sent} queued label${sent === 1 ? "" : "s"}.` : `${left} still queued.`);
}

function askForAnnotator(taskEl: HTMLElement): void {
  const doc = taskEl.ownerDocument;
  taskEl.replaceChildren();
  const form = doc.createElement("form");
  const input = doc.createElement("input");
  input.name = "annotator";
  input.placeholder = "annotator id";
  input.required = true;
  const go = doc.createElement("button");
  go.type = "submit";
  go.textContent = "Start";
  form.append(input, go);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const url = new URL(window.location.href);
    url.searchParams.set("annotator", input.value.trim());
    window.location.href = url.toString();
  });
  taskEl.appendChild(form);
}

async function boot(): Promise<void> {
  const taskEl = document.getElementById("task");
  const progressEl = document.getElementById("progress");
  if (!taskEl || !progressEl) return;

  const annotator = annotatorFromUrl();
  if (!annotator) {
    askForAnnotator(taskEl);
    return;
  }
  // labels stranded by an earlier outage go out first
  await flushOutbox(window.localStorage, async (label) => {
    await api.postLabel(label);
  });
  await refreshProgress(progressEl);
  await loadNext(taskEl, progressEl, annotator);
}

void boot();
