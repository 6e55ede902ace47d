import { ApiClient } from "./api";
import { renderHistory, renderRecommendation, renderStaleBadge } from "./render";
import { newSession } from "./state";
import type { EngineMetaDoc } from "./types";
import { WhatIfLoop } from "./whatif";

const SERVICE_URL = (window as { PTSELECT_URL?: string }).PTSELECT_URL ?? "http://127.0.0.1:8321";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function start(): Promise<void> {
  const api = new ApiClient(SERVICE_URL);
  const state = newSession(Math.floor(Math.random() * 2 ** 31));
  const resultRoot = byId("result");
  const historyRoot = byId("history");
  let meta: EngineMetaDoc | null = null;

  const loop = new WhatIfLoop(state, api, {
    onUpdate: (s) => {
      if (s.latest) renderRecommendation(resultRoot, s.latest, meta);
      renderStaleBadge(byId("status"), s.stale);
      renderHistory(historyRoot, s.history, meta);
    },
  });
  byId("status").addEventListener("click", (ev) => {
    if ((ev.target as HTMLElement).classList.contains("retry")) loop.retry();
  });

  const engines = await api.listEngines();
  const select = byId("engine") as HTMLSelectElement;
  for (const id of engines) {
    const opt = document.createElement("option");
    opt.value = id;
    opt.textContent = id.slice(0, 12);
    select.appendChild(opt);
  }

  const covRoot = byId("covariates");
  const weightRoot = byId("weights");

  async function selectEngine(id: string): Promise<void> {
    meta = await api.getMeta(id);
    state.engineId = id;
    covRoot.replaceChildren();
    state.covariates = new Array(meta.r).fill(0);
    for (const name of meta.covariate_names) {
      const label = document.createElement("label");
      label.textContent = name;
      const input = document.createElement("input");
      input.type = "number";
      input.step = "any";
      input.addEventListener("input", () => {
        const values = Array.from(covRoot.querySelectorAll("input")).map((n) =>
          Number((n as HTMLInputElement).value),
        );
        // r is validated against the engine metadata before any request
        if (values.length === meta!.r && values.every(Number.isFinite)) {
          loop.setCovariates(values);
        }
      });
      label.appendChild(input);
      covRoot.appendChild(label);
    }
    weightRoot.replaceChildren();
    state.weights = new Array(meta.J).fill(1);
    for (const resp of meta.responses) {
      const label = document.createElement("label");
      label.textContent = resp.name;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = "0";
      slider.max = "1";
      slider.step = "0.01";
      slider.value = String(1 / meta!.J);
      slider.addEventListener("input", () => {
        const values = Array.from(weightRoot.querySelectorAll("input")).map((n) =>
          Number((n as HTMLInputElement).value),
        );
        loop.setWeights(values);
      });
      label.appendChild(slider);
      weightRoot.appendChild(label);
    }
  }

  select.addEventListener("change", () => void selectEngine(select.value));
  if (engines.length > 0) {
    select.value = engines[0];
    await selectEngine(engines[0]);
  }
}

void start();
