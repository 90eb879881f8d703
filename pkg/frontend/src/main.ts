// Wire the page together: editor -> debounced session -> results panel,
// result click -> compare view, toggles -> re-query with config overrides.

import { getEndpoint, getHealth, postQuery } from "./api";
import { renderCompare, renderResults, renderStatus } from "./render";
import { DEFAULT_OPTIONS, DraftSession } from "./session";
import type { FeatureName, QueryOptions } from "./types";

const STARTER_DRAFT = `/songs/{id}/album:
  get:
    summary: get album of a song
    parameters:
      - name: songID
        in: path
`;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function readOptions(): QueryOptions {
  const enabled: FeatureName[] = [];
  for (const feature of ["tree", "text", "fuzzy"] as const) {
    if (element<HTMLInputElement>(`toggle-${feature}`).checked) enabled.push(feature);
  }
  const topK = Number(element<HTMLSelectElement>("top-k").value);
  return { enabledFeatures: enabled, topK };
}

function start(): void {
  const editor = element<HTMLTextAreaElement>("editor");
  const resultsPanel = element<HTMLElement>("results");
  const comparePanel = element<HTMLElement>("compare");
  const statusLine = element<HTMLElement>("status");
  const validation = element<HTMLElement>("validation");

  const session = new DraftSession(postQuery, {
    onResults: (response) => {
      renderResults(resultsPanel, response, (result) => {
        session.selectedResultId = result.endpoint_id;
        getEndpoint(result.endpoint_id)
          .then((detail) => renderCompare(comparePanel, editor.value, detail))
          .catch((error) => renderStatus(statusLine, String(error), "error"));
      });
      renderStatus(statusLine, `${response.results.length} recommendations for ${response.query_name}`, "ok");
    },
    onValidationError: (message) => {
      validation.textContent = message ?? "";
      validation.hidden = message === null;
    },
    onQueryError: (error) => renderStatus(statusLine, String(error), "error"),
  });

  editor.addEventListener("input", () => session.edit(editor.value));
  for (const feature of ["tree", "text", "fuzzy"] as const) {
    element<HTMLInputElement>(`toggle-${feature}`).addEventListener("change", () => {
      session.setOptions(readOptions());
    });
  }
  element<HTMLSelectElement>("top-k").addEventListener("change", () => {
    session.setOptions(readOptions());
  });

  getHealth()
    .then((health) => renderStatus(
      statusLine, `index ready: ${health.endpoints} endpoints`, "info"))
    .catch(() => renderStatus(statusLine, "service unavailable (503): no index loaded", "error"));

  editor.value = STARTER_DRAFT;
  session.setOptions(DEFAULT_OPTIONS);
  session.edit(editor.value);
}

document.addEventListener("DOMContentLoaded", start);
