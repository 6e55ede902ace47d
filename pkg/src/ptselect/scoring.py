"""Composite patient scores built from fitted single-index models.

For one response and K arms, each arm's margin is its predicted link value
minus the best of the other arms; the patient score for that response is the
(best margin, best arm) pair. At most one margin can be positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .singleindex import SimFit, predict_link
from .smoothing import Kernel

__all__ = [
    "PatientScore",
    "ScorePanel",
    "margins_from_links",
    "pick_best_arm",
    "score_margins",
    "score_patient",
    "LINK_TIE_TOL",
]

# Link values within this tolerance of the maximum are treated as tied and
# the winning arm is drawn uniformly at random.
LINK_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PatientScore:
    """Best margin s and best arm d (1-based) for one response."""

    s: float
    d: int


@dataclass(frozen=True)
class ScorePanel:
    """Per-response patient scores plus the link values they came from."""

    scores: tuple[PatientScore, ...]
    links: np.ndarray  # J x K


def margins_from_links(links) -> np.ndarray:
    """S_k = link_k - max of the other links, for each arm k."""
    links = np.asarray(links, dtype=float)
    k = links.size
    if k < 2:
        raise ValueError("need at least two arms")
    out = np.empty(k)
    for i in range(k):
        out[i] = links[i] - np.max(np.delete(links, i))
    return out


def pick_best_arm(links, rng: np.random.Generator, tol: float = LINK_TIE_TOL) -> int:
    """Arm (1-based) with the largest link value; ties drawn uniformly."""
    links = np.asarray(links, dtype=float)
    top = float(links.max())
    contenders = np.flatnonzero(links >= top - tol)
    if contenders.size == 1:
        return int(contenders[0]) + 1
    return int(contenders[int(rng.integers(contenders.size))]) + 1


def score_margins(fits: list[SimFit], x, kernel: Kernel | None = None) -> np.ndarray:
    """Margins for one response given that response's K fitted models."""
    links = np.array([predict_link(f, x, kernel) for f in fits])
    return margins_from_links(links)


def score_patient(
    fits_by_response: list[list[SimFit]],
    x,
    rng: np.random.Generator,
    kernel: Kernel | None = None,
) -> ScorePanel:
    """Score one covariate vector against all J x K fitted models."""
    links = np.array(
        [[predict_link(f, x, kernel) for f in fits] for fits in fits_by_response]
    )
    return score_panel_from_links(links, rng)


def score_panel_from_links(links: np.ndarray, rng: np.random.Generator) -> ScorePanel:
    """Build the score panel from precomputed J x K link values."""
    scores = []
    for row in links:
        margins = margins_from_links(row)
        d = pick_best_arm(row, rng)
        scores.append(PatientScore(s=float(margins[d - 1]), d=d))
    return ScorePanel(scores=tuple(scores), links=np.asarray(links, dtype=float))
