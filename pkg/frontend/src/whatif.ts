import type { ApiClient } from "./api";
import type { SessionState } from "./state";
import { applyRecommendation, buildRequest } from "./state";

export interface WhatIfCallbacks {
  onUpdate: (state: SessionState) => void;
}

/**
 * Debounced what-if loop: control changes schedule one request; responses
 * are applied only if no newer request was issued meanwhile (latest wins).
 * Failures keep the last result and mark the view stale; retry() re-issues.
 */
export class WhatIfLoop {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestCounter = 0;

  constructor(
    public state: SessionState,
    private api: Pick<ApiClient, "recommend">,
    private callbacks: WhatIfCallbacks,
    private debounceMs = 150,
  ) {}

  setWeights(weights: number[]): void {
    this.state.weights = [...weights];
    this.schedule();
  }

  setCovariates(covariates: number[]): void {
    this.state.covariates = [...covariates];
    this.schedule();
  }

  setRho(rho: number): void {
    this.state.rho = rho;
    this.schedule();
  }

  retry(): void {
    this.schedule();
  }

  private schedule(): void {
    if (this.timer) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.issue();
    }, this.debounceMs);
  }

  /** Issue immediately (used by tests and the retry affordance). */
  async issue(): Promise<void> {
    const { engineId } = this.state;
    if (engineId === null || this.state.covariates.length === 0) return;
    const id = ++this.requestCounter;
    try {
      const doc = await this.api.recommend(engineId, buildRequest(this.state));
      if (id !== this.requestCounter) return; // a newer request superseded this one
      applyRecommendation(this.state, doc);
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      if (id !== this.requestCounter) return;
      this.state.stale = true;
    }
    this.callbacks.onUpdate(this.state);
  }

  flushForTests(): Promise<void> {
    if (this.timer) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    return this.issue();
  }
}
