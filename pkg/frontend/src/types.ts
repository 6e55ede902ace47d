export interface PatientScoreDoc {
  s: number;
  d: number;
}

export interface RecommendationFlags {
  low_confidence_strata: number[][];
  aggregation_tie_break: boolean;
  bandwidth_widenings: number;
  floored_ipcw_weights: number;
}

export interface RecommendationDoc {
  schema: string;
  engine_id?: string;
  mu: number[][];
  u0: PatientScoreDoc[];
  ranks: number[][];
  v_star: number[];
  k_star: number;
  weights: number[];
  weights_normalized: number[];
  rho: number;
  seed: number;
  flags: RecommendationFlags;
}

export interface ResponseMeta {
  name: string;
  kind: string;
  transform: string;
}

export interface EngineMetaDoc {
  schema: string;
  engine_id: string;
  J: number;
  K: number;
  r: number;
  responses: ResponseMeta[];
  covariate_names: string[];
  arm_names: string[];
  n_per_arm: number[];
}

export interface RecommendRequest {
  covariates: number[];
  weights: number[];
  rho?: number;
  seed: number;
}

export interface WhatIfEntry {
  weights: number[];
  k_star: number;
}

export function validateRecommendation(doc: unknown): RecommendationDoc {
  const d = doc as RecommendationDoc;
  if (
    !d ||
    typeof d !== "object" ||
    !Array.isArray(d.mu) ||
    d.mu.length === 0 ||
    !d.mu.every((row) => Array.isArray(row) && row.every((v) => typeof v === "number")) ||
    !Array.isArray(d.v_star) ||
    typeof d.k_star !== "number" ||
    !Array.isArray(d.ranks) ||
    d.ranks.length !== d.mu.length
  ) {
    throw new Error("malformed recommendation document");
  }
  return d;
}
