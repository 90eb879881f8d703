// Thin typed client for the /v1 endpoints. Everything else in the UI talks
// to these three functions, never to fetch directly.

import type { EndpointDetail, HealthResponse, QueryOptions, QueryResponse } from "./types";

async function toJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new Error(`${response.status}: ${detail}`);
  }
  return response.json() as Promise<T>;
}

export async function postQuery(draft: string, options: QueryOptions): Promise<QueryResponse> {
  return toJson(await fetch("/v1/query", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({
      draft,
      top_k: options.topK,
      config_override: { enabled_features: options.enabledFeatures },
    }),
  }));
}

export async function getEndpoint(id: number): Promise<EndpointDetail> {
  return toJson(await fetch(`/v1/endpoints/${id}`));
}

export async function getHealth(): Promise<HealthResponse> {
  return toJson(await fetch("/v1/health"));
}
