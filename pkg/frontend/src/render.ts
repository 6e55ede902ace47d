import type { EngineMetaDoc, RecommendationDoc, WhatIfEntry } from "./types";
import { validateRecommendation } from "./types";

/**
 * Every displayed number is String(value) of the parsed document, which for
 * JSON doubles reproduces the service's own decimal text: the service and
 * JavaScript both emit the shortest round-tripping representation.
 */
export function formatNumber(v: number): string {
  return String(v);
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderError(root: HTMLElement, message: string): void {
  root.replaceChildren();
  const banner = el("div", "error-banner", message);
  banner.setAttribute("role", "alert");
  root.appendChild(banner);
}

export function renderRecommendation(
  root: HTMLElement,
  rawDoc: unknown,
  meta: EngineMetaDoc | null,
): void {
  let doc: RecommendationDoc;
  try {
    doc = validateRecommendation(rawDoc);
  } catch (err) {
    renderError(root, `could not display recommendation: ${(err as Error).message}`);
    return;
  }
  root.replaceChildren();
  const J = doc.mu.length;
  const K = doc.mu[0].length;
  const armName = (k: number) => meta?.arm_names?.[k - 1] ?? `arm ${k}`;
  const respName = (j: number) => meta?.responses?.[j]?.name ?? `response ${j + 1}`;

  const table = el("table", "mu-table") as HTMLTableElement;
  const head = table.createTHead().insertRow();
  head.appendChild(el("th", "corner", "response \\ arm"));
  for (let k = 1; k <= K; k++) {
    const th = el("th", k === doc.k_star ? "arm-head k-star" : "arm-head", armName(k));
    th.dataset.arm = String(k);
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (let j = 0; j < J; j++) {
    const row = body.insertRow();
    row.appendChild(el("th", "resp-head", respName(j)));
    for (let k = 1; k <= K; k++) {
      const cell = row.insertCell();
      cell.className = k === doc.k_star ? "mu-cell k-star" : "mu-cell";
      cell.dataset.j = String(j);
      cell.dataset.k = String(k);
      cell.appendChild(el("span", "mu-value", formatNumber(doc.mu[j][k - 1])));
      cell.appendChild(el("span", "rank-badge", formatNumber(doc.ranks[j][k - 1])));
    }
  }
  root.appendChild(table);

  const order = [...doc.v_star.keys()]
    .sort((a, b) => doc.v_star[a] - doc.v_star[b])
    .map((i) => armName(i + 1));
  const vstar = el("div", "v-star");
  vstar.appendChild(el("span", "label", "aggregated order: "));
  vstar.appendChild(el("span", "order", order.join(" > ")));
  root.appendChild(vstar);

  const star = el("div", "k-star-line");
  star.appendChild(el("span", "label", "recommended: "));
  const pick = el("span", "k-star-name", armName(doc.k_star));
  pick.dataset.arm = String(doc.k_star);
  star.appendChild(pick);
  root.appendChild(star);

  const flags = el("div", "flags");
  if (doc.flags?.low_confidence_strata?.length) {
    for (const [j, k] of doc.flags.low_confidence_strata) {
      flags.appendChild(
        el("span", "flag low-confidence", `low confidence: ${respName(j)} / ${armName(k)}`),
      );
    }
  }
  if (doc.flags?.aggregation_tie_break) {
    flags.appendChild(el("span", "flag tie-break", "aggregation tie broken at random"));
  }
  root.appendChild(flags);
}

export function renderHistory(root: HTMLElement, history: WhatIfEntry[], meta: EngineMetaDoc | null): void {
  root.replaceChildren();
  const list = el("ol", "history");
  for (const entry of history) {
    const name = meta?.arm_names?.[entry.k_star - 1] ?? `arm ${entry.k_star}`;
    list.appendChild(
      el("li", "history-entry", `${entry.weights.map(formatNumber).join(" : ")} -> ${name}`),
    );
  }
  root.appendChild(list);
}

export function renderStaleBadge(root: HTMLElement, stale: boolean): void {
  let badge = root.querySelector<HTMLElement>(".stale-badge");
  if (stale) {
    if (!badge) {
      badge = el("div", "stale-badge", "service unreachable; showing last result");
      const retry = el("button", "retry", "retry");
      badge.appendChild(retry);
      root.appendChild(badge);
    }
  } else {
    badge?.remove();
  }
}
