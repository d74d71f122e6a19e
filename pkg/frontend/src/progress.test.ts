import { beforeEach, describe, expect, it } from "vitest";

import { renderProgress } from "./progress.js";

function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("renderProgress", () => {
  it("lists per-annotator counters and totals", () => {
    const el = container();
    renderProgress(el, {
      annotators: { u2: { assigned: 6, labeled: 6 }, u1: { assigned: 6, labeled: 2 } },
      total_labeled: 8,
      models: 2,
    });
    const items = [...el.querySelectorAll("li")];
    expect(items.map((i) => i.dataset.annotator)).toEqual(["u1", "u2"]);
    expect(el.textContent).toContain("u1: 2 / 6");
    expect(el.textContent).toContain("u2: 6 / 6");
    expect(el.querySelector('li[data-annotator="u2"]')?.classList.contains("complete")).toBe(true);
    expect(el.querySelector('li[data-annotator="u1"]')?.classList.contains("complete")).toBe(false);
    expect(el.querySelector(".totals")?.textContent).toBe("8 labels across 2 models");
  });

  it("uses the singular for one model", () => {
    const el = container();
    renderProgress(el, { annotators: {}, total_labeled: 0, models: 1 });
    expect(el.querySelector(".totals")?.textContent).toBe("0 labels across 1 model");
  });

  it("shows an offline banner when the api is unreachable", () => {
    const el = container();
    renderProgress(el, null);
    const banner = el.querySelector(".banner.offline")!;
    expect(banner.getAttribute("role")).toBe("alert");
    expect(banner.textContent).toContain("Server unreachable");
    expect(el.querySelector("ul")).toBeNull();
  });

  it("re-render replaces the previous content", () => {
    const el = container();
    renderProgress(el, null);
    renderProgress(el, { annotators: { a: { assigned: 1, labeled: 0 } }, total_labeled: 0, models: 1 });
    expect(el.querySelector(".banner.offline")).toBeNull();
    expect(el.querySelectorAll("li").length).toBe(1);
  });
});
