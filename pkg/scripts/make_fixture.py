#!/usr/bin/env python3
"""Generate the shipped synthetic HIV-trial-like fixture.

Four arms, three responses (one right-censored survival-type, two
positive biomarkers), five baseline covariates. Arm 1 ("arm-0") is
constructed to be dominated everywhere so weight sweeps exhibit the
expected assignment pattern; among the other arms the best one varies
with the covariates. Deterministic: re-running reproduces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

N_PER_ARM = 120
SEED = 20240517

OUT_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def standardized_covariates(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Raw clinical-looking covariates and their standardized versions."""
    log_cd4 = rng.normal(5.7, 0.4, n)
    log_cd8 = rng.normal(6.7, 0.5, n)
    age = rng.normal(35.0, 8.0, n)
    weight = rng.normal(75.0, 12.0, n)
    months = np.clip(rng.normal(15.0, 10.0, n), 0.0, None)
    raw = np.column_stack([log_cd4, log_cd8, age, weight, months])
    mu = np.array([5.7, 6.7, 35.0, 75.0, 15.0])
    sd = np.array([0.4, 0.5, 8.0, 12.0, 10.0])
    return raw, (raw - mu) / sd


def main() -> None:
    rng = np.random.default_rng(SEED)
    arms_rows = []
    # Per-arm (baseline shift, personalization slope); arm 1 shifted down on
    # every response so it is never the best choice.
    surv_fx = {1: (-0.45, 0.0), 2: (0.25, 0.5), 3: (0.15, -0.45), 4: (0.0, 0.1)}
    cd4_fx = {1: (-0.30, 0.0), 2: (0.20, -0.4), 3: (0.10, 0.45), 4: (0.05, 0.05)}
    cd8_fx = {1: (-0.25, 0.0), 2: (0.10, 0.3), 3: (0.05, -0.3), 4: (0.15, 0.2)}

    for arm in (1, 2, 3, 4):
        raw, z = standardized_covariates(rng, N_PER_ARM)
        s1 = np.tanh(0.8 * z[:, 0] - 0.4 * z[:, 2] + 0.3 * z[:, 3])
        s2 = np.tanh(0.6 * z[:, 1] + 0.5 * z[:, 4] - 0.2 * z[:, 2])

        a, b = surv_fx[arm]
        surv_true = np.exp(1.6 + a + b * s1 + 0.35 * z[:, 0] + rng.normal(0, 0.35, N_PER_ARM))
        cens = rng.exponential(18.0, N_PER_ARM)
        t_obs = np.minimum(surv_true, cens)
        event = (surv_true <= cens).astype(int)

        a, b = cd4_fx[arm]
        cd4 = np.exp(5.9 + a + b * s2 + 0.45 * z[:, 0] + rng.normal(0, 0.3, N_PER_ARM))
        a, b = cd8_fx[arm]
        cd8 = np.exp(6.8 + a + b * s1 + 0.3 * z[:, 1] + rng.normal(0, 0.3, N_PER_ARM))

        for i in range(N_PER_ARM):
            arms_rows.append(
                [arm]
                + [repr(float(v)) for v in raw[i]]
                + [repr(float(t_obs[i])), str(int(event[i])), repr(float(cd4[i])), repr(float(cd8[i]))]
            )

    OUT_DIR.mkdir(exist_ok=True)
    header = [
        "arm",
        "log_cd4_base",
        "log_cd8_base",
        "age",
        "weight",
        "months_prior_therapy",
        "surv_time",
        "surv_event",
        "cd4_week20",
        "cd8_week20",
    ]
    csv_path = OUT_DIR / "synthetic_trial.csv"
    with csv_path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in arms_rows:
            fh.write(",".join(str(v) for v in row) + "\n")

    manifest = {
        "schema": "ptselect.dataset/1",
        "arm_column": "arm",
        "arm_names": ["arm-0", "arm-1", "arm-2", "arm-3"],
        "covariates": ["log_cd4_base", "log_cd8_base", "age", "weight", "months_prior_therapy"],
        "responses": [
            {
                "name": "log_surv",
                "kind": "right_censored",
                "transform": "log",
                "time_column": "surv_time",
                "event_column": "surv_event",
            },
            {"name": "log_cd4", "kind": "complete", "transform": "log", "column": "cd4_week20"},
            {"name": "log_cd8", "kind": "complete", "transform": "log", "column": "cd8_week20"},
        ],
        "info": {
            "description": "Synthetic fixture shaped like a four-arm HIV trial; not real data.",
            "n_per_arm": {"arm-0": N_PER_ARM, "arm-1": N_PER_ARM, "arm-2": N_PER_ARM, "arm-3": N_PER_ARM},
            "generator": "scripts/make_fixture.py",
            "generator_seed": SEED,
        },
    }
    (OUT_DIR / "synthetic_trial.manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {csv_path} ({len(arms_rows)} rows)")


if __name__ == "__main__":
    main()
