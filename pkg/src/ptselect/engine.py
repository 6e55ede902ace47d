"""End-to-end engine: fit all (response, arm) models and recommend treatments.

Fitting walks every (response j, arm k) pair: complete responses get the
plain single-index fit, right-censored ones get a per-arm censoring model
and the reweighted fit. All training subjects are then scored, and one
conditional-mean surface per (j, k) is cached. Recommendation scores a new
covariate vector, evaluates the J x K mean matrix, ranks each response's
row, and aggregates the rankings into one ordering whose top arm is
returned.

Determinism: every random choice is drawn from streams derived from the
engine seed (fitting, training-score tie-breaks) or from the
recommendation's (seed, request content) pair, so identical inputs always
reproduce identical outputs, regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .condmeans import MeanSurface, build_surface, eval_mu_detail
from .data import ResponseSpec, TrialDataset
from .errors import EngineFitError
from .jsonio import canonical_bytes, digest
from .rankagg import (
    KMAX_EXACT,
    AggregationProblem,
    RankedList,
    aggregate_ce,
    exact_minimizers,
    ranks_from_values,
)
from .scoring import score_panel_from_links
from .singleindex import FitOptions, SimFit, fit_sim_complete, fit_sim_ipcw, predict_link, predict_link_values
from .smoothing import gaussian_kernel
from .survival import CensoringModel, SurvivalRecord, WeightTable, fit_aalen_censoring, ipcw_weights

__all__ = ["EngineConfig", "FittedEngine", "Recommendation", "fit_engine", "recommend", "recommend_batch"]

# Namespaces for seed-stream derivation.
_NS_FIT = 1
_NS_SCORE = 2
_NS_RECOMMEND = 3


@dataclass(frozen=True)
class EngineConfig:
    """Estimation knobs; defaults follow the shipped presets."""

    kernel: str = "gaussian"
    rho: float = 1.0
    restarts: int = 10
    max_evals: int = 250
    ipcw_floor: float = 0.05
    surface_bandwidth: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kernel != "gaussian":
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.restarts < 1 or self.max_evals < 10:
            raise ValueError("optimizer budget out of range")
        if not (0 < self.ipcw_floor < 1):
            raise ValueError("ipcw_floor must lie in (0, 1)")
        if self.surface_bandwidth is not None and self.surface_bandwidth <= 0:
            raise ValueError("surface_bandwidth must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        return cls(**d)

    def fit_options(self) -> FitOptions:
        return FitOptions(restarts=self.restarts, max_evals=self.max_evals)


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in key)))


@dataclass(frozen=True)
class FittedEngine:
    """Immutable result of fitting; safe to share across threads."""

    specs: tuple[ResponseSpec, ...]
    config: EngineConfig
    fits: tuple[tuple[SimFit, ...], ...]  # J x K
    surfaces: tuple[tuple[MeanSurface, ...], ...]  # J x K
    censoring: dict[int, tuple[tuple[CensoringModel, WeightTable], ...]]  # j -> per arm
    covariate_names: tuple[str, ...]
    arm_names: tuple[str, ...]
    n_per_arm: tuple[int, ...]

    @property
    def J(self) -> int:
        return len(self.specs)

    @property
    def K(self) -> int:
        return len(self.arm_names)

    @property
    def r(self) -> int:
        return len(self.covariate_names)

    def diagnostics(self) -> dict:
        floored = sum(
            int(wt.floor_applied.sum()) for pairs in self.censoring.values() for _, wt in pairs
        )
        rankdef = sum(
            len(cm.rank_deficient) for pairs in self.censoring.values() for cm, _ in pairs
        )
        return {
            "objective_values": [[f.objective_value for f in row] for row in self.fits],
            "floored_ipcw_weights": floored,
            "rank_deficient_risk_times": rankdef,
        }


@dataclass(frozen=True)
class Recommendation:
    """One treatment recommendation with full provenance."""

    mu: np.ndarray  # J x K
    u0: tuple[tuple[float, int], ...]  # (score, best-arm label) per response
    ranked_lists: tuple[RankedList, ...]
    v_star: tuple[int, ...]
    k_star: int
    weights: tuple[float, ...]
    weights_normalized: tuple[float, ...]
    rho: float
    seed: int
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": "ptselect.recommendation/1",
            "mu": [[float(v) for v in row] for row in self.mu],
            "u0": [{"s": float(s), "d": int(d)} for s, d in self.u0],
            "ranks": [list(map(int, rl.ranks)) for rl in self.ranked_lists],
            "v_star": list(map(int, self.v_star)),
            "k_star": int(self.k_star),
            "weights": [float(w) for w in self.weights],
            "weights_normalized": [float(w) for w in self.weights_normalized],
            "rho": float(self.rho),
            "seed": int(self.seed),
            "flags": self.flags,
        }


def _transformed_response(ds: TrialDataset, spec: ResponseSpec):
    """Return (values, events) on the estimation scale for one response."""
    if spec.censored:
        t, e = ds.censored[spec.name]
        if spec.transform == "log":
            if np.any(t <= 0):
                raise ValueError(f"response {spec.name!r}: log transform needs positive times")
            return np.log(t), e
        return t.astype(float), e
    y = ds.complete[spec.name]
    if spec.transform == "log":
        if np.any(y <= 0):
            raise ValueError(f"response {spec.name!r}: log transform needs positive values")
        return np.log(y), np.ones(y.size, dtype=bool)
    return y.astype(float), np.ones(y.size, dtype=bool)


def fit_engine(
    dataset: TrialDataset, specs: tuple[ResponseSpec, ...] | None = None, config: EngineConfig = EngineConfig()
) -> FittedEngine:
    """Fit every (response, arm) model and cache the mean surfaces.

    Raises EngineFitError listing every failed (response, arm) pair; a
    partially fitted engine is never returned.
    """
    specs = tuple(specs) if specs is not None else dataset.specs
    if len(specs) != len(dataset.specs):
        raise ValueError("spec count does not match dataset responses")
    K = dataset.K
    sizes = dataset.arm_sizes()
    for k, size in enumerate(sizes, start=1):
        if size == 0:
            raise EngineFitError([("<all>", k, "arm is empty")])

    options = config.fit_options()
    transformed = [_transformed_response(dataset, s) for s in specs]
    # Censoring models are fitted on the original time scale: the weights
    # depend only on event ordering, which monotone transforms preserve.
    fits: list[list[SimFit]] = []
    censoring: dict[int, list[tuple[CensoringModel, WeightTable]]] = {}
    failures: list[tuple[str, int, str]] = []
    for j, spec in enumerate(specs):
        row: list[SimFit] = []
        if spec.censored:
            censoring[j] = []
        for k in range(1, K + 1):
            mask = dataset.arm_mask(k)
            Xk = dataset.X[mask]
            rng = _rng(config.seed, _NS_FIT, j, k)
            try:
                if spec.censored:
                    raw_t, events = dataset.censored[spec.name]
                    records = [
                        SurvivalRecord(time=float(t), event=bool(e), covariates=x)
                        for t, e, x in zip(raw_t[mask], events[mask], Xk)
                    ]
                    model = fit_aalen_censoring(records)
                    table = ipcw_weights(model, records, floor=config.ipcw_floor)
                    censoring[j].append((model, table))
                    values, ev = transformed[j]
                    fit = fit_sim_ipcw(Xk, values[mask], ev[mask], table, rng, options)
                else:
                    values, _ = transformed[j]
                    fit = fit_sim_complete(Xk, values[mask], rng, options)
                row.append(fit)
            except Exception as exc:  # collected and reported per (j, k)
                failures.append((spec.name, k, f"{type(exc).__name__}: {exc}"))
        fits.append(row)
    if failures:
        raise EngineFitError(failures)

    kernel = gaussian_kernel()
    links = np.stack(
        [
            np.stack([predict_link_values(fit, dataset.X, kernel) for fit in row], axis=1)
            for row in fits
        ],
        axis=1,
    )  # n x J x K
    panels = [
        score_panel_from_links(links[i], _rng(config.seed, _NS_SCORE, i)) for i in range(dataset.n)
    ]

    surfaces: list[list[MeanSurface]] = []
    for j, spec in enumerate(specs):
        values, events = transformed[j]
        srow: list[MeanSurface] = []
        for k in range(1, K + 1):
            idx = np.flatnonzero(dataset.arm_mask(k))
            scores = np.array([panels[i].scores[j].s for i in idx])
            labels = np.array([panels[i].scores[j].d for i in idx])
            if spec.censored:
                table = censoring[j][k - 1][1]
                usage = np.where(events[idx], 1.0 / table.weights, 0.0)
            else:
                usage = np.ones(idx.size)
            srow.append(
                build_surface(
                    response=j,
                    arm=k,
                    scores=scores,
                    labels=labels,
                    values=values[idx],
                    weights=usage,
                    events=events[idx],
                    censored_mode=spec.censored,
                    bandwidth=config.surface_bandwidth,
                )
            )
        surfaces.append(srow)

    return FittedEngine(
        specs=specs,
        config=config,
        fits=tuple(tuple(row) for row in fits),
        surfaces=tuple(tuple(row) for row in surfaces),
        censoring={j: tuple(v) for j, v in censoring.items()},
        covariate_names=dataset.covariate_names,
        arm_names=dataset.arm_names,
        n_per_arm=sizes,
    )


def _request_streams(seed: int, x0: np.ndarray, weights: np.ndarray, rho: float, J: int):
    """Derive tie-break streams from the request content.

    Content-keyed derivation makes batch rows with identical content yield
    identical recommendations while staying reproducible for a given seed.
    """
    d = digest(canonical_bytes([seed, [float(v) for v in x0], [float(w) for w in weights], rho]))
    words = [int(d[i : i + 8], 16) for i in range(0, 32, 8)]
    root = np.random.SeedSequence([int(seed), _NS_RECOMMEND, *words])
    children = root.spawn(2 + J)
    score_rng = np.random.default_rng(children[0])
    agg_rng = np.random.default_rng(children[1])
    rank_rngs = [np.random.default_rng(c) for c in children[2:]]
    return score_rng, agg_rng, rank_rngs


def recommend(
    engine: FittedEngine,
    x0,
    weights,
    rho: float | None = None,
    seed: int = 0,
) -> Recommendation:
    """Recommend an arm for a new covariate vector.

    ``weights`` sets the relative importance of the J responses in the
    aggregation (only their ratios matter). ``seed`` drives all randomized
    tie-breaks and is echoed in the result.
    """
    x0 = np.asarray(x0, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if x0.shape != (engine.r,):
        raise ValueError(f"covariates must have length {engine.r}, got {x0.shape}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("covariates must be finite")
    if weights.shape != (engine.J,):
        raise ValueError(f"weights must have length {engine.J}, got {weights.shape}")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("weights must be finite and nonnegative with positive sum")
    rho = float(rho) if rho is not None else engine.config.rho
    if rho <= 0:
        raise ValueError("rho must be positive")

    kernel = gaussian_kernel()
    score_rng, agg_rng, rank_rngs = _request_streams(seed, x0, weights, rho, engine.J)

    links = np.array(
        [[predict_link(fit, x0, kernel) for fit in row] for row in engine.fits]
    )
    panel = score_panel_from_links(links, score_rng)

    mu = np.empty((engine.J, engine.K))
    low_confidence: list[list[int]] = []
    widenings = 0
    for j in range(engine.J):
        s, d = panel.scores[j].s, panel.scores[j].d
        for k in range(1, engine.K + 1):
            detail = eval_mu_detail(engine.surfaces[j][k - 1], s, d, kernel)
            mu[j, k - 1] = detail.value
            widenings += detail.widenings
            if detail.empty_stratum_fallback:
                low_confidence.append([j, k])

    ranked = tuple(ranks_from_values(mu[j], rank_rngs[j]) for j in range(engine.J))
    problem = AggregationProblem(lists=ranked, weights=tuple(float(w) for w in weights), rho=rho)
    tie_break = False
    if engine.K <= KMAX_EXACT:
        _, argmins = exact_minimizers(problem)
        tie_break = len(argmins) > 1
        v_star = argmins[int(agg_rng.integers(len(argmins)))] if tie_break else argmins[0]
    else:
        v_star = aggregate_ce(problem, agg_rng)
    k_star = v_star.index(1) + 1

    total = float(weights.sum())
    diag = engine.diagnostics()
    return Recommendation(
        mu=mu,
        u0=tuple((p.s, p.d) for p in panel.scores),
        ranked_lists=ranked,
        v_star=tuple(v_star),
        k_star=k_star,
        weights=tuple(float(w) for w in weights),
        weights_normalized=tuple(float(w) / total for w in weights),
        rho=rho,
        seed=int(seed),
        flags={
            "low_confidence_strata": low_confidence,
            "aggregation_tie_break": tie_break,
            "bandwidth_widenings": widenings,
            "floored_ipcw_weights": diag["floored_ipcw_weights"],
        },
    )


def recommend_batch(
    engine: FittedEngine,
    X0,
    weights,
    rho: float | None = None,
    seed: int = 0,
) -> list[Recommendation | dict]:
    """Elementwise :func:`recommend`; failed rows become error entries."""
    X0 = np.asarray(X0, dtype=float)
    if X0.ndim != 2:
        raise ValueError("X0 must be a 2-d array of covariate rows")
    out: list[Recommendation | dict] = []
    for i in range(X0.shape[0]):
        try:
            out.append(recommend(engine, X0[i], weights, rho, seed))
        except Exception as exc:
            out.append({"row": i, "error": f"{type(exc).__name__}: {exc}"})
    return out
