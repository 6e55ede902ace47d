"""Shared fixtures and helpers for statistical tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from ptselect.condmeans import build_surface
from ptselect.scoring import score_panel_from_links
from ptselect.simulation import ScenarioConfig, censoring_preset, generate_replicate, model_set
from ptselect.singleindex import FitOptions, fit_sim_complete, predict_link_values

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

# Reduced budget for statistical module tests; the acceptance suite uses the
# full default budget.
FAST_OPTIONS = FitOptions(restarts=6, max_evals=150)


def angular_degrees(a, b) -> float:
    """Angle between index vectors modulo sign (the link absorbs the sign)."""
    c = abs(float(np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1, 1)))
    return float(np.degrees(np.arccos(c)))


def ms1_complete_scenario(J: int, n: int, seed: int) -> ScenarioConfig:
    weights = {2: (0.5, 0.5), 3: (0.8, 0.1, 0.1), 4: (0.7, 0.1, 0.1, 0.1)}[J]
    return ScenarioConfig(
        model_set=1,
        J=J,
        n=n,
        sigma=0.1,
        error_corr=0.3,
        censoring=censoring_preset(1, "none", 0),
        weights=weights,
        seed=seed,
    )


def response2_fits_and_surfaces(seed: int, n: int, options: FitOptions = FAST_OPTIONS):
    """Fit response 2 of model set 1 across the three arms (complete data)
    and build that response's per-arm mean surfaces."""
    cfg = ms1_complete_scenario(J=2, n=n, seed=seed)
    ds = generate_replicate(cfg, np.random.default_rng(seed))
    y = ds.complete["resp2"]
    fits = []
    for k in (1, 2, 3):
        m = ds.arm_mask(k)
        fits.append(
            fit_sim_complete(ds.X[m], y[m], rng=np.random.default_rng((seed, k)), options=options)
        )
    surfaces = []
    for k in (1, 2, 3):
        mk = ds.arm_mask(k)
        links = np.stack([predict_link_values(f, ds.X[mk]) for f in fits], axis=1)
        panels = [
            score_panel_from_links(links[i][None, :], np.random.default_rng((seed, 99, k, i)))
            for i in range(links.shape[0])
        ]
        scores = np.array([p.scores[0].s for p in panels])
        labels = np.array([p.scores[0].d for p in panels])
        surfaces.append(build_surface(0, k, scores, labels, y[mk]))
    return ds, fits, surfaces


def score_one(fits, x0, seed):
    """Single-response score (s, d) of one covariate vector."""
    from ptselect.singleindex import predict_link

    links = np.array([predict_link(f, x0) for f in fits])
    panel = score_panel_from_links(links[None, :], np.random.default_rng(seed))
    return panel.scores[0].s, panel.scores[0].d


@pytest.fixture(scope="session")
def fixture_dataset():
    from ptselect.data import load_dataset

    return load_dataset(FIXTURE_DIR / "synthetic_trial.csv")


@pytest.fixture(scope="session")
def fixture_engine(fixture_dataset):
    """Engine fitted on the shipped synthetic trial, shared across tests."""
    from ptselect.engine import EngineConfig, fit_engine

    config = EngineConfig(seed=2024, restarts=5, max_evals=150)
    return fit_engine(fixture_dataset, config=config)


def ms1_beta(j: int, k: int) -> np.ndarray:
    return model_set(1).beta(j, k)
