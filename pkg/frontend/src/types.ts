// Shapes of the /v1 API payloads the UI consumes.

export interface EndpointPreview {
  name: string;
  methods: string[];
  quality: number;
  text: string;
  source_spec_ids: string[];
}

export interface RankedResult {
  endpoint_id: number;
  name: string;
  normalized_probability: number;
  raw_score: number;
  feature_breakdown: Record<string, number>;
  quality: number;
  preview: EndpointPreview;
}

export interface QueryResponse {
  query_name: string;
  results: RankedResult[];
}

export interface EndpointDetail {
  endpoint_id: number;
  name: string;
  quality: number;
  raw_text: string;
  tree_tokens: Record<string, number>;
  keyword_tokens: Record<string, number>;
  source_spec_ids: string[];
  operations: Record<string, unknown>;
}

export interface HealthResponse {
  status: string;
  endpoints: number;
  tree_vocab_size: number;
  keyword_vocab_size: number;
  format_version: number;
}

export type FeatureName = "tree" | "text" | "fuzzy";

export interface QueryOptions {
  enabledFeatures: FeatureName[];
  topK: number;
}
