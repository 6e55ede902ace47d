"""Univariate kernel smoothing primitives.

Conventions:
    u = (x0 - x_i) / h
    estimate(x0) = sum_i w_i y_i K(u_i) / sum_i w_i K(u_i)

The 1/h normalization of the kernel cancels in the ratio and is omitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateSample, DenominatorUnderflow

__all__ = [
    "Kernel",
    "gaussian_kernel",
    "nw_smooth",
    "nw_smooth_widened",
    "plugin_bandwidth",
    "DENOMINATOR_FLOOR",
    "WIDEN_FACTOR",
    "MAX_WIDENINGS",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Underflow guard for the smoothing denominator.
DENOMINATOR_FLOOR = 1e-300
# Bandwidth-widening retry policy applied by callers on underflow.
WIDEN_FACTOR = 1.5
MAX_WIDENINGS = 5


@dataclass(frozen=True)
class Kernel:
    """A symmetric probability-density kernel.

    Only the Gaussian kernel ships; ``kind`` exists so tests can register a
    compact kernel without touching call sites.
    """

    kind: str
    pdf: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, t):
        return self.pdf(np.asarray(t, dtype=float))


def _gaussian_pdf(t: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * t * t) / _SQRT_2PI


def gaussian_kernel() -> Kernel:
    """Standard normal density kernel."""
    return Kernel(kind="gaussian", pdf=_gaussian_pdf)


def nw_smooth(x, y, x0: float, kernel: Kernel, h: float, weights=None) -> float:
    """Weighted Nadaraya-Watson estimate at a single point.

    Parameters
    ----------
    x, y : array-like
        Training abscissae and responses.
    x0 : float
        Evaluation point.
    kernel : Kernel
        Symmetric density kernel.
    h : float
        Bandwidth (> 0).
    weights : array-like, optional
        Nonnegative observation weights; all ones when omitted. At least one
        weight must be positive.

    Returns
    -------
    float
        sum_i w_i y_i K((x0-x_i)/h) / sum_i w_i K((x0-x_i)/h).

    Raises
    ------
    DenominatorUnderflow
        If the denominator falls below ``DENOMINATOR_FLOOR``; x0 is outside
        the effective support of the weighted sample.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if h <= 0 or not np.isfinite(h):
        raise ValueError("bandwidth must be positive and finite")
    if weights is None:
        w = np.ones_like(x)
    else:
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if not np.any(w > 0):
            raise ValueError("at least one weight must be positive")
    k = w * kernel((x0 - x) / h)
    den = float(k.sum())
    if den < DENOMINATOR_FLOOR:
        raise DenominatorUnderflow(
            f"denominator {den:.3e} below {DENOMINATOR_FLOOR:.0e} at x0={x0!r}"
        )
    return float((k * y).sum() / den)


def nw_smooth_widened(x, y, x0: float, kernel: Kernel, h: float, weights=None) -> tuple[float, int]:
    """Like :func:`nw_smooth` but widen h by ``WIDEN_FACTOR`` on underflow.

    Retries up to ``MAX_WIDENINGS`` times, then re-raises. Returns the
    estimate and the number of widenings applied.
    """
    attempt = 0
    while True:
        try:
            return nw_smooth(x, y, x0, kernel, h * WIDEN_FACTOR**attempt, weights), attempt
        except DenominatorUnderflow:
            attempt += 1
            if attempt > MAX_WIDENINGS:
                raise


def plugin_bandwidth(xs) -> float:
    """Normal-scale plug-in bandwidth.

    h = 1.06 * min(sd, IQR/1.349) * n^(-1/5), with the convention that a
    zero spread measure defers to the other one. This is a deterministic
    rule-of-thumb stand-in for a full plug-in selector; callers can override
    the result through configuration.

    Raises
    ------
    DegenerateSample
        If all values are identical (both spread measures vanish). Callers
        must fall back to a fixed floor bandwidth.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        raise DegenerateSample("need at least 2 values for a bandwidth")
    sd = float(np.std(xs, ddof=1))
    q75, q25 = np.percentile(xs, [75.0, 25.0])
    iqr_scale = float(q75 - q25) / 1.349
    candidates = [s for s in (sd, iqr_scale) if s > 0.0]
    if not candidates:
        raise DegenerateSample("all values identical; no data-driven bandwidth")
    return 1.06 * min(candidates) * xs.size ** (-0.2)
