/**
 * Task card: video player, the caption under judgment, four Yes/No
 * questions, one submit button.
 *
 * The renderer only ever prints the caption, the video, and the question
 * text. It deliberately has no code path that writes a model identifier
 * into the DOM, which is what keeps blind mode blind even if a payload
 * carried the field.
 */

import type { TaskView } from "./api.js";

export type MetricKey = "fluency" | "creativity" | "pcc" | "consistency";

export const METRICS: ReadonlyArray<{ key: MetricKey; label: string; description: string }> = [
  {
    key: "fluency",
    label: "Fluency",
    description: "Is the caption grammatical, natural-sounding English?",
  },
  {
    key: "creativity",
    label: "Creativity",
    description: "Does the caption make a creative, non-literal comparison rather than a plain description?",
  },
  {
    key: "pcc",
    label: "Primary concept",
    description: "Is the subject of the caption actually what the video shows?",
  },
  {
    key: "consistency",
    label: "Consistency",
    description: "Does the comparison as a whole fit the content of the video?",
  },
];

export type Votes = Record<MetricKey, boolean>;

export interface TaskHandlers {
  onSubmit(votes: Votes): void;
}

function questionBlock(doc: Document, metric: (typeof METRICS)[number]): HTMLFieldSetElement {
  const field = doc.createElement("fieldset");
  field.className = "question";
  field.dataset.metric = metric.key;
  field.title = metric.description;
  const legend = doc.createElement("legend");
  legend.textContent = metric.label;
  legend.title = metric.description;
  field.appendChild(legend);
  for (const value of ["yes", "no"] as const) {
    const label = doc.createElement("label");
    const input = doc.createElement("input");
    input.type = "radio";
    input.name = metric.key;
    input.value = value;
    label.appendChild(input);
    label.appendChild(doc.createTextNode(value === "yes" ? "Yes" : "No"));
    field.appendChild(label);
  }
  return field;
}

/** Read the current answers; null until every question is answered. */
export function collectVotes(root: ParentNode): Votes | null {
  const votes: Partial<Votes> = {};
  for (const metric of METRICS) {
    const checked = root.querySelector<HTMLInputElement>(`input[name="${metric.key}"]:checked`);
    if (!checked) return null;
    votes[metric.key] = checked.value === "yes";
  }
  return votes as Votes;
}

export function renderTask(container: HTMLElement, task: TaskView, handlers: TaskHandlers): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const card = doc.createElement("div");
  card.className = "task-card";

  if (task.video_url) {
    const video = doc.createElement("video");
    video.className = "task-video";
    video.controls = true;
    video.preload = "metadata";
    video.src = task.video_url;
    // if the embed cannot load, fall back to a plain link out
    video.addEventListener("error", () => {
      const fallback = doc.createElement("p");
      fallback.className = "video-fallback";
      fallback.appendChild(doc.createTextNode("Video failed to load. "));
      const link = doc.createElement("a");
      link.href = task.video_url ?? "#";
      link.target = "_blank";
      link.rel = "noopener";
      link.textContent = "Open it in a new tab";
      fallback.appendChild(link);
      video.replaceWith(fallback);
    });
    card.appendChild(video);
  }

  const caption = doc.createElement("blockquote");
  caption.className = "task-caption";
  caption.textContent = task.caption ?? "";
  card.appendChild(caption);

  const form = doc.createElement("form");
  form.className = "judgments";
  for (const metric of METRICS) {
    form.appendChild(questionBlock(doc, metric));
  }

  const submit = doc.createElement("button");
  submit.type = "submit";
  submit.className = "submit";
  submit.textContent = "Submit";
  submit.disabled = true;
  form.appendChild(submit);

  form.addEventListener("change", () => {
    submit.disabled = collectVotes(form) === null;
  });
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const votes = collectVotes(form);
    if (votes) handlers.onSubmit(votes);
  });

  card.appendChild(form);

  const status = doc.createElement("p");
  status.className = "status";
  status.setAttribute("role", "status");
  card.appendChild(status);

  container.appendChild(card);
}

export function setTaskStatus(container: HTMLElement, message: string, options?: { retry?: () => void }): void {
  const status = container.querySelector<HTMLElement>(".status");
  if (!status) return;
  status.replaceChildren();
  status.appendChild(container.ownerDocument.createTextNode(message));
  if (options?.retry) {
    const button = container.ownerDocument.createElement("button");
    button.type = "button";
    button.className = "retry";
    button.textContent = "Retry now";
    button.addEventListener("click", options.retry);
    status.appendChild(button);
  }
}

export function renderDone(container: HTMLElement, labeled: number): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const note = doc.createElement("p");
  note.className = "done";
  note.textContent = `All assigned tasks are labeled (${labeled} submitted). Thank you.`;
  container.appendChild(note);
}
