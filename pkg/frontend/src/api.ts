import type { EngineMetaDoc, RecommendationDoc, RecommendRequest } from "./types";

/** Stable stringify: the request hash used for memoization. */
export function requestKey(engineId: string, req: RecommendRequest): string {
  return JSON.stringify([
    engineId,
    req.covariates,
    req.weights,
    req.rho ?? null,
    req.seed,
  ]);
}

export class ApiClient {
  private memo = new Map<string, RecommendationDoc>();
  private inflight: AbortController | null = null;

  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  async listEngines(): Promise<string[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/engines`);
    if (!resp.ok) throw new Error(`engine list failed: ${resp.status}`);
    const doc = (await resp.json()) as { engines: string[] };
    return doc.engines;
  }

  async getMeta(engineId: string): Promise<EngineMetaDoc> {
    const resp = await this.fetchFn(`${this.baseUrl}/engines/${engineId}`);
    if (!resp.ok) throw new Error(`metadata failed: ${resp.status}`);
    return (await resp.json()) as EngineMetaDoc;
  }

  /**
   * POST a recommendation request. Identical requests (by hash) are served
   * from the memo without re-fetching; a newly issued request aborts any
   * one still in flight (latest wins).
   */
  async recommend(engineId: string, req: RecommendRequest): Promise<RecommendationDoc> {
    const key = requestKey(engineId, req);
    const hit = this.memo.get(key);
    if (hit) return hit;

    if (this.inflight) this.inflight.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const resp = await this.fetchFn(`${this.baseUrl}/engines/${engineId}/recommend`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(req),
        signal: controller.signal,
      });
      if (!resp.ok) {
        throw new Error(`recommend failed: ${resp.status}`);
      }
      const doc = (await resp.json()) as RecommendationDoc;
      this.memo.set(key, doc);
      return doc;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  memoSize(): number {
    return this.memo.size;
  }
}
