"""Kernel estimators of per-arm conditional mean response given the score.

A surface caches one arm's training subjects for one response: their
composite scores, best-arm labels, and observed responses (with censoring
weights in censored mode). Evaluation at a score (s, d) smooths the
responses of the training subjects labeled d, in score distance. With
right-censored responses, uncensored times are reweighted by inverse
censoring-survival in both numerator and denominator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, EmptyStratum
from .smoothing import Kernel, gaussian_kernel, nw_smooth_widened, plugin_bandwidth

__all__ = ["MeanSurface", "MuEval", "build_surface", "eval_mu", "eval_mu_detail", "FALLBACK_BANDWIDTH"]

# Used when the arm's scores have no spread; the estimate is then the
# (weighted) stratum mean regardless of the bandwidth value.
FALLBACK_BANDWIDTH = 1.0


@dataclass(frozen=True)
class MeanSurface:
    """Training cache for one (response, arm) conditional-mean estimator."""

    response: int
    arm: int
    scores: np.ndarray
    labels: np.ndarray
    values: np.ndarray
    weights: np.ndarray  # usage weights: 1, or event/censoring-survival
    events: np.ndarray
    bandwidth: float
    censored_mode: bool


@dataclass(frozen=True)
class MuEval:
    value: float
    empty_stratum_fallback: bool
    widenings: int


def build_surface(
    response: int,
    arm: int,
    scores,
    labels,
    values,
    weights=None,
    events=None,
    censored_mode: bool = False,
    bandwidth: float | None = None,
) -> MeanSurface:
    """Cache one arm's tuples and pick the smoothing bandwidth.

    The bandwidth defaults to the plug-in rule over the arm's scores,
    falling back to ``FALLBACK_BANDWIDTH`` for a degenerate score sample.
    An empty stratum is not an error here; it surfaces at evaluation time.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    values = np.asarray(values, dtype=float)
    n = scores.size
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    ev = np.ones(n, dtype=bool) if events is None else np.asarray(events, dtype=bool)
    if not (labels.size == values.size == w.size == ev.size == n):
        raise ValueError("surface arrays must be conformable")
    if bandwidth is None:
        try:
            bandwidth = plugin_bandwidth(scores)
        except DegenerateSample:
            bandwidth = FALLBACK_BANDWIDTH
    return MeanSurface(
        response=response,
        arm=arm,
        scores=scores,
        labels=labels,
        values=values,
        weights=w,
        events=ev,
        bandwidth=float(bandwidth),
        censored_mode=censored_mode,
    )


def eval_mu_detail(surface: MeanSurface, s: float, d: int, kernel: Kernel | None = None) -> MuEval:
    """Smoothed conditional mean at score (s, d) with diagnostics.

    When no training subject in the arm carries label d with positive mass,
    the label restriction is dropped and the result is flagged as a
    low-confidence fallback rather than failing the whole recommendation.
    """
    kernel = kernel if kernel is not None else gaussian_kernel()
    in_stratum = surface.labels == d
    mass = surface.weights * in_stratum
    fallback = not np.any(mass > 0)
    if fallback:
        mass = surface.weights
        if not np.any(mass > 0):
            raise EmptyStratum(
                f"no usable training subjects at all for response {surface.response} arm {surface.arm}"
            )
    value, widenings = nw_smooth_widened(
        surface.scores, surface.values, s, kernel, surface.bandwidth, mass
    )
    return MuEval(value=value, empty_stratum_fallback=fallback, widenings=widenings)


def eval_mu(surface: MeanSurface, s: float, d: int, kernel: Kernel | None = None) -> float:
    return eval_mu_detail(surface, s, d, kernel).value
