// Draft session state machine: debounced querying with stale-response
// fencing. A monotone version counter guards every async boundary, so the
// results on screen always belong to the draft text that produced them, at
// most one query is in flight, and responses for superseded drafts are
// dropped on the floor.

import type { QueryOptions, QueryResponse } from "./types";

export type QueryFn = (draft: string, options: QueryOptions) => Promise<QueryResponse>;

export interface SessionCallbacks {
  onResults: (response: QueryResponse, version: number) => void;
  onValidationError?: (message: string | null) => void;
  onQueryError?: (error: unknown) => void;
}

export const DEFAULT_OPTIONS: QueryOptions = {
  enabledFeatures: ["tree", "text", "fuzzy"],
  topK: 10,
};

export class DraftSession {
  private version = 0;
  private displayedVersion = 0;
  private inFlight = false;
  private queued = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private draft = "";
  private options: QueryOptions = { ...DEFAULT_OPTIONS };
  selectedResultId: number | null = null;

  constructor(
    private readonly query: QueryFn,
    private readonly callbacks: SessionCallbacks,
    private readonly debounceMs = 300,
  ) {}

  currentVersion(): number {
    return this.version;
  }

  currentOptions(): QueryOptions {
    return { enabledFeatures: [...this.options.enabledFeatures], topK: this.options.topK };
  }

  edit(draft: string): void {
    this.draft = draft;
    this.bumpAndSchedule();
  }

  setOptions(options: QueryOptions): void {
    if (options.enabledFeatures.length === 0) {
      // Invalid configs never reach the network; the last good results stay up.
      this.callbacks.onValidationError?.("enable at least one of tree, text, fuzzy");
      return;
    }
    this.callbacks.onValidationError?.(null);
    this.options = { enabledFeatures: [...options.enabledFeatures], topK: options.topK };
    this.bumpAndSchedule();
  }

  private bumpAndSchedule(): void {
    this.version += 1;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire();
    }, this.debounceMs);
  }

  private async fire(): Promise<void> {
    if (this.draft.trim() === "") return;
    if (this.inFlight) {
      // Keep the single-in-flight invariant; rerun once the current one lands.
      this.queued = true;
      return;
    }
    const version = this.version;
    this.inFlight = true;
    try {
      const response = await this.query(this.draft, this.options);
      if (version === this.version && version > this.displayedVersion) {
        this.displayedVersion = version;
        this.callbacks.onResults(response, version);
      }
    } catch (error) {
      if (version === this.version) this.callbacks.onQueryError?.(error);
    } finally {
      this.inFlight = false;
      if (this.queued) {
        this.queued = false;
        if (this.version > this.displayedVersion) void this.fire();
      }
    }
  }
}
