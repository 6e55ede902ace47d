"""Censoring-process modeling and inverse-probability-of-censoring weights.

The censoring hazard is modeled with Aalen's additive model: at each time a
subject is censored, the least-squares increment of the cumulative regression
functions is computed from the at-risk design matrix. Per-subject weights are
exp(-cumulative hazard) evaluated strictly before the subject's own observed
time. A product-limit (Kaplan-Meier) estimator over either indicator is
provided as an independent validation oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SurvivalRecord",
    "CensoringModel",
    "WeightTable",
    "StepFunction",
    "fit_aalen_censoring",
    "kaplan_meier",
    "ipcw_weights",
    "WEIGHT_FLOOR",
]

# Lower clamp for IPCW weights, mirroring common practice for small-weight
# stability. Configurable at the call sites that consume weights.
WEIGHT_FLOOR = 0.05


@dataclass(frozen=True)
class SurvivalRecord:
    """One subject's observed follow-up.

    ``time`` is the observed time T = min(true response, censoring time) and
    ``event`` is True when the true response was observed (False = censored).
    ``covariates`` is the baseline design row (intercept prepended
    internally). ``path``, when given, is a step covariate path as a list of
    (start_time, vector) breakpoints sampled at censoring jump times;
    ``covariates`` applies before the first breakpoint.
    """

    time: float
    event: bool
    covariates: np.ndarray
    path: tuple[tuple[float, np.ndarray], ...] | None = None

    def design_row(self, t: float) -> np.ndarray:
        cov = self.covariates
        if self.path:
            for start, vec in self.path:
                if start <= t:
                    cov = vec
                else:
                    break
        return np.concatenate(([1.0], np.asarray(cov, dtype=float)))


@dataclass(frozen=True)
class CensoringModel:
    """Fitted additive censoring-hazard model.

    ``increments[m]`` is the cumulative-regression increment vector at
    ``jump_times[m]`` (strictly increasing; tied censoring times are merged
    by summing their per-event increments, which share the same risk set).
    """

    jump_times: np.ndarray
    increments: np.ndarray
    design_at_fit: np.ndarray
    rank_deficient: tuple[float, ...] = field(default=())

    def cumulative_hazard(self, record: SurvivalRecord, t: float, strict: bool = False) -> float:
        """Accumulated hazard for one subject at time t.

        ``strict=True`` sums jumps strictly before t (the T- convention used
        for weights); otherwise jumps at exactly t are included.
        """
        total = 0.0
        for jump, inc in zip(self.jump_times, self.increments):
            if jump > t or (strict and jump == t):
                break
            total += float(record.design_row(jump) @ inc)
        return total


@dataclass(frozen=True)
class WeightTable:
    """Per-subject IPCW weights exp(-hazard at T-), clamped to [floor, 1]."""

    weights: np.ndarray
    floor_applied: np.ndarray
    floor: float = WEIGHT_FLOOR


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function starting at 1 (product-limit curve)."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t) -> np.ndarray | float:
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        vals = np.concatenate(([1.0], self.values))
        out = vals[idx]
        return float(out) if np.isscalar(t) else out


def fit_aalen_censoring(records: list[SurvivalRecord]) -> CensoringModel:
    """Fit Aalen's additive model to the censoring process.

    At each censoring time the increment solves R(t) dB = sum of censored
    subjects' design rows at t, with R(t) the at-risk outer-product matrix.
    A numerically singular R(t) is handled with a generalized inverse and
    the time is recorded in ``rank_deficient`` rather than aborting.
    """
    if not records:
        raise ValueError("need at least one record")
    times = np.array([r.time for r in records], dtype=float)
    events = np.array([r.event for r in records], dtype=bool)
    p1 = records[0].design_row(0.0).size

    cens_times = np.unique(times[~events])
    increments = np.zeros((cens_times.size, p1))
    flagged: list[float] = []
    for m, t in enumerate(cens_times):
        at_risk = times >= t
        rows = np.stack([records[i].design_row(t) for i in np.flatnonzero(at_risk)])
        risk = rows.T @ rows
        rhs = np.zeros(p1)
        for i in np.flatnonzero((~events) & (times == t)):
            rhs += records[i].design_row(t)
        if np.linalg.matrix_rank(risk) < p1:
            flagged.append(float(t))
            increments[m] = np.linalg.pinv(risk) @ rhs
        else:
            increments[m] = np.linalg.solve(risk, rhs)

    design = np.stack([r.design_row(0.0) for r in records])
    return CensoringModel(
        jump_times=cens_times,
        increments=increments,
        design_at_fit=design,
        rank_deficient=tuple(flagged),
    )


def kaplan_meier(records: list[SurvivalRecord], target: str = "censoring") -> StepFunction:
    """Product-limit estimator over the chosen indicator.

    ``target="censoring"`` treats censorings as the failures of interest
    (the usual validation curve for IPCW weights); ``target="event"`` is the
    ordinary survival curve.
    """
    if not records:
        raise ValueError("need at least one record")
    if target not in ("event", "censoring"):
        raise ValueError(f"unknown target {target!r}")
    times = np.array([r.time for r in records], dtype=float)
    fails = np.array([r.event for r in records], dtype=bool)
    if target == "censoring":
        fails = ~fails

    uniq = np.unique(times)
    surv = 1.0
    out_t, out_v = [], []
    for t in uniq:
        n_risk = int((times >= t).sum())
        d = int(fails[times == t].sum())
        if d > 0 and n_risk > 0:
            surv *= 1.0 - d / n_risk
            out_t.append(float(t))
            out_v.append(surv)
    return StepFunction(times=np.array(out_t), values=np.array(out_v))


def ipcw_weights(
    model: CensoringModel, records: list[SurvivalRecord], floor: float = WEIGHT_FLOOR
) -> WeightTable:
    """Evaluate exp(-cumulative censoring hazard at T-) per subject.

    Weights are clamped to [floor, 1]; additive-hazard increments can push
    the raw value outside that range in small risk sets. Only subjects with
    ``event=True`` are used downstream with nonzero mass; censored subjects
    enter the fit through the risk sets only.
    """
    n = len(records)
    weights = np.empty(n)
    floored = np.zeros(n, dtype=bool)
    for i, rec in enumerate(records):
        lam = model.cumulative_hazard(rec, rec.time, strict=True)
        w = float(np.exp(-lam))
        if w < floor:
            weights[i] = floor
            floored[i] = True
        else:
            weights[i] = min(w, 1.0)
    return WeightTable(weights=weights, floor_applied=floored, floor=floor)
