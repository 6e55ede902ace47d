import type { RecommendationDoc, RecommendRequest, WhatIfEntry } from "./types";

export interface SessionState {
  engineId: string | null;
  covariates: number[];
  weights: number[]; // raw slider values
  rho: number;
  seed: number;
  latest: RecommendationDoc | null;
  stale: boolean;
  history: WhatIfEntry[]; // append-only within the session
}

export function newSession(seed: number): SessionState {
  return {
    engineId: null,
    covariates: [],
    weights: [],
    rho: 1.0,
    seed,
    latest: null,
    stale: false,
    history: [],
  };
}

/** Sliders are free-scale; the body carries their normalized shares, so
 * equal slider positions always produce the same request. */
export function normalizedShares(weights: number[]): number[] {
  const total = weights.reduce((a, b) => a + b, 0);
  if (total <= 0) throw new Error("weights must sum to a positive value");
  return weights.map((w) => w / total);
}

export function buildRequest(state: SessionState): RecommendRequest {
  return {
    covariates: [...state.covariates],
    weights: normalizedShares(state.weights),
    rho: state.rho,
    seed: state.seed,
  };
}

export function applyRecommendation(state: SessionState, doc: RecommendationDoc): SessionState {
  state.latest = doc;
  state.stale = false;
  state.history.push({ weights: normalizedShares(state.weights), k_star: doc.k_star });
  return state;
}
