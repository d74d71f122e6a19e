/**
 * Progress dashboard: per-annotator counters from /api/progress, plus a
 * banner state for when the API cannot be reached.
 */

import type { ProgressSummary } from "./api.js";

export function renderProgress(container: HTMLElement, summary: ProgressSummary | null): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  if (summary === null) {
    const banner = doc.createElement("p");
    banner.className = "banner offline";
    banner.setAttribute("role", "alert");
    banner.textContent = "Server unreachable. Progress is unavailable; new labels are kept locally until it returns.";
    container.appendChild(banner);
    return;
  }

  const heading = doc.createElement("h2");
  heading.textContent = "Progress";
  container.appendChild(heading);

  const list = doc.createElement("ul");
  list.className = "progress-list";
  for (const [annotator, counts] of Object.entries(summary.annotators).sort()) {
    const item = doc.createElement("li");
    item.dataset.annotator = annotator;
    item.textContent = `${annotator}: ${counts.labeled} / ${counts.assigned}`;
    if (counts.labeled >= counts.assigned) {
      item.classList.add("complete");
    }
    list.appendChild(item);
  }
  container.appendChild(list);

  const totals = doc.createElement("p");
  totals.className = "totals";
  totals.textContent = `${summary.total_labeled} labels across ${summary.models} model${summary.models === 1 ? "" : "s"}`;
  container.appendChild(totals);
}
