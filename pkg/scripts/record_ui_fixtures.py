#!/usr/bin/env python3
"""Record real service responses for the frontend test fixtures.

Fits the shipped synthetic-trial engine, replays a weight sweep through the
HTTP service in-process, and stores the raw response bodies (bytes as
strings) so the UI tests can assert byte-level agreement with what the
service actually sends.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from ptselect.data import load_dataset
from ptselect.engine import EngineConfig, fit_engine
from ptselect.service import EngineStore, create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "src" / "fixtures" / "sweep.json"

SEED = 7
WEIGHT_SWEEP = [
    [1.0, 0.0, 0.0],
    [0.33, 0.33, 0.33],
    [0.7, 0.2, 0.1],
    [0.5, 0.4, 0.1],
    [0.1, 0.6, 0.3],
]


def pick_patient(client, engine_id: str, dataset) -> list[float]:
    """A test patient whose highlighted arm changes somewhere in the sweep."""
    rng = np.random.default_rng(5)
    for idx in rng.permutation(dataset.n)[:80]:
        covs = [float(v) for v in dataset.X[idx]]
        stars = []
        for weights in WEIGHT_SWEEP:
            resp = client.post(
                f"/engines/{engine_id}/recommend",
                json={"covariates": covs, "weights": weights, "seed": SEED},
            )
            stars.append(resp.json()["k_star"])
        if len(set(stars)) > 1:
            return covs
    raise SystemExit("no sweep-sensitive patient found")


def main() -> None:
    dataset = load_dataset(ROOT / "fixtures" / "synthetic_trial.csv")
    engine = fit_engine(dataset, config=EngineConfig(seed=2024, restarts=5, max_evals=150))
    store = EngineStore()
    engine_id = "fixture"
    store.put(engine_id, engine)
    app = create_app(store)
    with TestClient(app) as client:
        meta_resp = client.get(f"/engines/{engine_id}")
        covs = pick_patient(client, engine_id, dataset)
        steps = []
        for weights in WEIGHT_SWEEP:
            body = {"covariates": covs, "weights": weights, "seed": SEED}
            resp = client.post(f"/engines/{engine_id}/recommend", json=body)
            assert resp.status_code == 200
            steps.append({"request": body, "raw": resp.content.decode("utf-8")})
        doc = {
            "engine_id": engine_id,
            "meta_raw": meta_resp.content.decode("utf-8"),
            "covariates": covs,
            "steps": steps,
        }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    stars = [json.loads(s["raw"])["k_star"] for s in steps]
    print(f"wrote {OUT} with k* path {stars}")


if __name__ == "__main__":
    main()
