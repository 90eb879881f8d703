// DOM rendering. Pure functions of (container, data) so the jsdom tests can
// assert exactly what the user sees.

import type { EndpointDetail, QueryResponse, RankedResult } from "./types";

const BAR_COLORS: Record<string, string> = {
  tree: "#4e79a7",
  text: "#f28e2b",
  fuzzy: "#59a14f",
  quality: "#b07aa1",
};

export function qualityBadge(quality: number): HTMLElement {
  const badge = document.createElement("span");
  badge.className = "quality-badge";
  badge.dataset.quality = quality.toFixed(3);
  badge.textContent = `q ${quality.toFixed(2)}`;
  badge.classList.add(quality >= 0.8 ? "quality-high" : quality >= 0.5 ? "quality-mid" : "quality-low");
  return badge;
}

export function breakdownBars(result: RankedResult): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "breakdown";
  const total = Math.max(result.raw_score, 1e-12);
  for (const [feature, value] of Object.entries(result.feature_breakdown)) {
    const bar = document.createElement("span");
    bar.className = "breakdown-bar";
    bar.dataset.feature = feature;
    bar.dataset.value = String(value);
    bar.style.width = `${Math.max(0, (value / total) * 100).toFixed(1)}%`;
    bar.style.background = BAR_COLORS[feature] ?? "#888";
    bar.title = `${feature}: ${value.toFixed(3)}`;
    wrap.appendChild(bar);
  }
  return wrap;
}

export function renderResults(
  container: HTMLElement,
  response: QueryResponse,
  onSelect: (result: RankedResult) => void,
): void {
  container.replaceChildren();
  if (response.results.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "no recommendations";
    container.appendChild(empty);
    return;
  }
  const list = document.createElement("ol");
  list.className = "results";
  for (const result of response.results) {
    const item = document.createElement("li");
    item.className = "result";
    item.dataset.endpointId = String(result.endpoint_id);
    item.dataset.probability = result.normalized_probability.toFixed(6);

    const header = document.createElement("div");
    header.className = "result-header";
    const name = document.createElement("code");
    name.className = "result-name";
    name.textContent = result.name;
    const probability = document.createElement("span");
    probability.className = "result-probability";
    probability.textContent = result.normalized_probability.toFixed(3);
    header.append(name, probability, qualityBadge(result.quality));
    item.appendChild(header);
    item.appendChild(breakdownBars(result));

    const summary = document.createElement("p");
    summary.className = "result-text";
    summary.textContent = result.preview.text.slice(0, 140);
    item.appendChild(summary);

    item.addEventListener("click", () => onSelect(result));
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderCompare(
  container: HTMLElement,
  draftText: string,
  detail: EndpointDetail,
): void {
  container.replaceChildren();
  const heading = document.createElement("div");
  heading.className = "compare-header";
  const title = document.createElement("code");
  title.textContent = detail.name;
  heading.append(title, qualityBadge(detail.quality));
  const sources = document.createElement("span");
  sources.className = "compare-sources";
  sources.textContent = `from ${detail.source_spec_ids.join(", ")}`;
  heading.appendChild(sources);
  container.appendChild(heading);

  const panes = document.createElement("div");
  panes.className = "compare-panes";
  for (const [label, text] of [
    ["your draft", draftText],
    ["recommended endpoint", JSON.stringify({ [detail.name]: detail.operations }, null, 2)],
  ] as const) {
    const pane = document.createElement("div");
    pane.className = "compare-pane";
    const caption = document.createElement("h3");
    caption.textContent = label;
    const body = document.createElement("pre");
    body.textContent = text;
    pane.append(caption, body);
    panes.appendChild(pane);
  }
  container.appendChild(panes);
}

export function renderStatus(container: HTMLElement, text: string, kind: "ok" | "error" | "info"): void {
  container.textContent = text;
  container.className = `status status-${kind}`;
}
