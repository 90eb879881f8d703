// @vitest-environment jsdom

import { describe, expect, it, vi } from "vitest";

import { breakdownBars, qualityBadge, renderCompare, renderResults } from "../src/render";
import type { EndpointDetail, QueryResponse, RankedResult } from "../src/types";

function makeResult(id: number, probability: number, raw: number): RankedResult {
  return {
    endpoint_id: id,
    name: `/things/${id}`,
    normalized_probability: probability,
    raw_score: raw,
    feature_breakdown: { tree: raw * 0.4, text: raw * 0.3, fuzzy: raw * 0.2, quality: raw * 0.1 },
    quality: 0.87,
    preview: {
      name: `/things/${id}`,
      methods: ["get"],
      quality: 0.87,
      text: `Returns thing ${id}`,
      source_spec_ids: ["a.json"],
    },
  };
}

const PAYLOAD: QueryResponse = {
  query_name: "/things/{id}",
  results: [
    makeResult(4, 1.0, 0.82),
    makeResult(11, 0.93, 0.77),
    makeResult(2, 0.81, 0.69),
    makeResult(9, 0.64, 0.55),
    makeResult(7, 0.52, 0.48),
  ],
};

describe("renderResults", () => {
  it("displays exactly the payload's ids and scores, in order", () => {
    const container = document.createElement("div");
    renderResults(container, PAYLOAD, () => undefined);

    const items = [...container.querySelectorAll<HTMLElement>(".result")];
    expect(items.map((el) => Number(el.dataset.endpointId)))
      .toEqual(PAYLOAD.results.map((r) => r.endpoint_id));
    expect(items.map((el) => el.dataset.probability))
      .toEqual(PAYLOAD.results.map((r) => r.normalized_probability.toFixed(6)));
    expect(items.map((el) => el.querySelector(".result-name")?.textContent))
      .toEqual(PAYLOAD.results.map((r) => r.name));
  });

  it("invokes the selection callback with the clicked result", () => {
    const container = document.createElement("div");
    const onSelect = vi.fn();
    renderResults(container, PAYLOAD, onSelect);
    container.querySelectorAll<HTMLElement>(".result")[2].click();
    expect(onSelect).toHaveBeenCalledWith(PAYLOAD.results[2]);
  });

  it("shows an empty message when there are no results", () => {
    const container = document.createElement("div");
    renderResults(container, { query_name: "/x", results: [] }, () => undefined);
    expect(container.textContent).toContain("no recommendations");
  });
});

describe("breakdownBars", () => {
  it("bars carry values that sum to the raw score", () => {
    const result = makeResult(1, 1.0, 0.73);
    const bars = [...breakdownBars(result).querySelectorAll<HTMLElement>(".breakdown-bar")];
    const total = bars.reduce((acc, bar) => acc + Number(bar.dataset.value), 0);
    expect(total).toBeCloseTo(result.raw_score, 9);
    expect(bars.map((b) => b.dataset.feature)).toEqual(["tree", "text", "fuzzy", "quality"]);
  });
});

describe("qualityBadge", () => {
  it("shows the quality value and a band class", () => {
    const badge = qualityBadge(0.87);
    expect(badge.dataset.quality).toBe("0.870");
    expect(badge.classList.contains("quality-high")).toBe(true);
    expect(qualityBadge(0.31).classList.contains("quality-low")).toBe(true);
  });
});

describe("renderCompare", () => {
  it("shows the draft and the recommended endpoint side by side", () => {
    const container = document.createElement("div");
    const detail: EndpointDetail = {
      endpoint_id: 4,
      name: "/things/4",
      quality: 0.9,
      raw_text: "Returns thing 4",
      tree_tokens: { parameters_thingid: 1 },
      keyword_tokens: { return: 1, thing: 1 },
      source_spec_ids: ["a.json", "b.json"],
      operations: { get: { summary: "Get a thing" } },
    };
    renderCompare(container, "/things/{id}:\n  get: {}\n", detail);
    const panes = [...container.querySelectorAll("pre")];
    expect(panes).toHaveLength(2);
    expect(panes[0].textContent).toContain("/things/{id}");
    expect(panes[1].textContent).toContain("Get a thing");
    expect(container.textContent).toContain("a.json, b.json");
  });
});
