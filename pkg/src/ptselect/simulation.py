"""Synthetic-trial generator and selection-accuracy harness.

Two model sets of nonlinear mean functions over a 5-dimensional uniform
covariate drive K=3 arms and up to J=4 responses; the first response is a
positive survival-type outcome that can be right-censored either completely
at random (exponential censoring times, per-arm rates) or dependent on the
covariates through a fixed direction vector. A scenario run repeats:
generate a trial, fit the engine, recommend for a fresh covariate draw, and
compare against a truth label defined by aggregating fresh noisy response
draws with the same weights.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .data import ResponseSpec, TrialDataset
from .engine import EngineConfig, fit_engine, recommend
from .rankagg import AggregationProblem, aggregate_exact, ranks_from_values

__all__ = [
    "ModelSet",
    "CensoringSpec",
    "ScenarioConfig",
    "AccuracyReport",
    "model_set",
    "censoring_preset",
    "scenario_preset",
    "generate_replicate",
    "truth_label",
    "run_scenario",
]

R_COVARIATES = 5

# Direction for covariate-dependent censoring (named to avoid clashing with
# the error correlation or the footrule exponent).
COVDEP_DIRECTION = np.array([0.7, 0.3, 0.0, 0.5, -0.5])

# Index vectors for model set 1, one per (response, arm); entries are
# rounded to two decimals, so they are renormalized to exact unit length.
_BETA_MS1 = {
    (1, 1): (0.74, -0.37, -0.37, 0.37, -0.19),
    (1, 2): (0.80, 0.00, 0.20, -0.40, -0.40),
    (1, 3): (0.07, 0.15, 0.30, 0.45, -0.82),
    (2, 1): (0.23, 0.15, 0.45, -0.83, -0.15),
    (2, 2): (-0.69, 0.51, 0.34, 0.34, -0.17),
    (2, 3): (0.63, 0.21, 0.32, -0.53, -0.42),
    (3, 1): (0.15, 0.30, 0.07, -0.82, 0.45),
    (3, 2): (0.24, 0.16, 0.65, -0.24, -0.65),
    (3, 3): (-0.18, 0.36, 0.54, 0.18, -0.72),
    (4, 1): (-0.40, 0.00, 0.80, -0.40, 0.20),
    (4, 2): (0.48, 0.27, -0.55, 0.41, -0.48),
    (4, 3): (-0.75, 0.34, -0.14, 0.14, 0.54),
}

# Common unit index vector for model set 2.
_C_COMMON = np.full(R_COVARIATES, 1.0 / math.sqrt(R_COVARIATES))


def _ms1_g(j: int, k: int, u):
    u = np.asarray(u, dtype=float)
    if j == 1:
        if k == 1:
            return 1.0 + np.exp(0.5 * u**3)
        if k == 2:
            return 1.0 + np.exp(-0.5 + 0.5 * (-0.8 + u) ** 2)
        return 1.0 + np.exp(1.0 - 5.0 * u**2)
    if j == 2:
        if k == 1:
            return np.exp(0.5 - 2.5 * (-1.0 + u) ** 2)
        if k == 2:
            return np.exp(0.5 - 2.5 * (1.0 + u) ** 2)
        return np.exp(0.5 - 2.5 * u**2)
    if j == 3:
        if k == 1:
            return np.exp(0.5 - 3.0 * (-1.0 + u) ** 4)
        if k == 2:
            return np.exp(0.5 - 3.0 * (1.0 + u) ** 4)
        return np.exp(0.5 - 3.0 * u**4)
    if k == 1:
        return 1.0 + np.exp(-1.0 + u)
    if k == 2:
        return 1.0 + np.exp(-1.0 - u)
    return np.exp(1.0 - u**2)


def _ms2_g(j: int, k: int, u):
    u = np.asarray(u, dtype=float)
    half_pi, third_pi = math.pi / 2.0, math.pi / 3.0
    if j == 1:
        phase = {1: 2 * math.pi / 5, 2: 6 * math.pi / 5, 3: -2 * math.pi / 5}[k]
        return 2.0 + np.sin(phase + half_pi * u)
    if j == 2:
        phase = {1: 0.0, 2: 4 * math.pi / 5, 3: -4 * math.pi / 5}[k]
        return np.cos(phase + half_pi * u)
    if j == 3:
        phase = {1: math.pi / 3, 2: math.pi, 3: -2 * math.pi / 3}[k]
        return np.sin(phase + third_pi * u)
    phase = {1: 0.0, 2: 2 * math.pi / 3, 3: -2 * math.pi / 3}[k]
    return np.cos(phase + third_pi * u)


@dataclass(frozen=True)
class ModelSet:
    """Mean functions and index vectors for one simulation model set."""

    set_id: int

    def beta(self, j: int, k: int) -> np.ndarray:
        if self.set_id == 1:
            b = np.array(_BETA_MS1[(j, k)], dtype=float)
            return b / np.linalg.norm(b)
        return _C_COMMON.copy()

    def mean(self, j: int, k: int, X) -> np.ndarray:
        u = np.asarray(X, dtype=float) @ self.beta(j, k)
        g = _ms1_g if self.set_id == 1 else _ms2_g
        return g(j, k, u)


def model_set(set_id: int) -> ModelSet:
    if set_id not in (1, 2):
        raise ValueError("model set must be 1 or 2")
    return ModelSet(set_id=set_id)


@dataclass(frozen=True)
class CensoringSpec:
    """Censoring mechanism for the survival-type response (j=1).

    ``random``: exponential censoring times with per-arm rate zeta.
    ``covdep``: exponential with rate zeta1 where direction'X > threshold
    and zeta2 otherwise.
    """

    kind: str = "none"
    zeta: tuple[float, ...] = ()
    zeta1: tuple[float, ...] = ()
    zeta2: tuple[float, ...] = ()
    direction: tuple[float, ...] = tuple(COVDEP_DIRECTION)
    threshold: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "random", "covdep"):
            raise ValueError(f"unknown censoring kind {self.kind!r}")


# Per-arm exponential rates calibrated for 25% / 50% censoring.
_CENS_PRESETS = {
    (1, "random", 25): {"zeta": (0.14, 0.14, 0.12)},
    (1, "random", 50): {"zeta": (0.35, 0.35, 0.32)},
    (1, "covdep", 25): {"zeta1": (0.10, 0.10, 0.07), "zeta2": (0.20, 0.20, 0.18)},
    (1, "covdep", 50): {"zeta1": (0.20, 0.20, 0.18), "zeta2": (0.50, 0.50, 0.47)},
    (2, "random", 25): {"zeta": (0.11, 0.18, 0.23)},
    (2, "random", 50): {"zeta": (0.26, 0.45, 0.55)},
    (2, "covdep", 25): {"zeta1": (0.05, 0.10, 0.15), "zeta2": (0.20, 0.26, 0.30)},
    (2, "covdep", 50): {"zeta1": (0.15, 0.25, 0.35), "zeta2": (0.40, 0.62, 0.70)},
}


def censoring_preset(set_id: int, kind: str, rate_pct: int) -> CensoringSpec:
    """Calibrated censoring parameters for a model set at 25% or 50%."""
    if kind == "none":
        return CensoringSpec(kind="none")
    params = _CENS_PRESETS.get((set_id, kind, rate_pct))
    if params is None:
        raise ValueError(f"no censoring preset for ({set_id}, {kind}, {rate_pct})")
    return CensoringSpec(kind=kind, **params)


@dataclass(frozen=True)
class ScenarioConfig:
    model_set: int = 1
    J: int = 4
    K: int = 3
    n: int = 100
    error_dist: str = "normal"
    sigma: float = 0.1
    error_corr: float = 0.3
    censoring: CensoringSpec = CensoringSpec()
    weights: tuple[float, ...] = (0.7, 0.1, 0.1, 0.1)
    rho: float = 1.0
    replicates: int = 200
    seed: int = 0
    optimizer_restarts: int = 10
    optimizer_max_evals: int = 250

    def __post_init__(self):
        if self.model_set not in (1, 2):
            raise ValueError("model_set must be 1 or 2")
        if self.J not in (1, 2, 3, 4):
            raise ValueError("J must be between 1 and 4")
        if self.K != 3:
            raise ValueError("the shipped model sets define K=3 arms")
        if self.error_dist not in ("normal", "double_exponential"):
            raise ValueError(f"unknown error distribution {self.error_dist!r}")
        if len(self.weights) != self.J:
            raise ValueError("need one weight per response")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["censoring"] = asdict(self.censoring)
        return d


def _draw_errors(cfg: ScenarioConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """n x J errors: zero mean, covariance sigma^2 * R(error_corr).

    The double-exponential case is the Gaussian scale mixture with a unit
    exponential mixing variable: Laplace marginals, same covariance.
    """
    J = cfg.J
    cov = cfg.sigma**2 * (
        (1.0 - cfg.error_corr) * np.eye(J) + cfg.error_corr * np.ones((J, J))
    )
    L = np.linalg.cholesky(cov)
    z = rng.standard_normal((n, J)) @ L.T
    if cfg.error_dist == "normal":
        return z
    mix = rng.exponential(1.0, size=n)
    return np.sqrt(mix)[:, None] * z


def _censoring_times(cfg: ScenarioConfig, k: int, X: np.ndarray, rng: np.random.Generator):
    cs = cfg.censoring
    n = X.shape[0]
    if cs.kind == "none":
        return None
    if cs.kind == "random":
        rate = cs.zeta[k - 1]
        return rng.exponential(1.0 / rate, size=n)
    side = X @ np.asarray(cs.direction) > cs.threshold
    rate = np.where(side, cs.zeta1[k - 1], cs.zeta2[k - 1])
    return rng.exponential(1.0 / rate)


def generate_replicate(cfg: ScenarioConfig, rng: np.random.Generator) -> TrialDataset:
    """One synthetic trial: K arms of n subjects each, j=1 right-censored."""
    ms = model_set(cfg.model_set)
    arms = np.repeat(np.arange(1, cfg.K + 1), cfg.n)
    X = rng.uniform(-1.0, 1.0, size=(cfg.K * cfg.n, R_COVARIATES))
    Y = np.empty((cfg.K * cfg.n, cfg.J))
    T = np.empty(cfg.K * cfg.n)
    events = np.ones(cfg.K * cfg.n, dtype=bool)
    for k in range(1, cfg.K + 1):
        rows = slice((k - 1) * cfg.n, k * cfg.n)
        Xk = X[rows]
        eps = _draw_errors(cfg, cfg.n, rng)
        for j in range(1, cfg.J + 1):
            Y[rows, j - 1] = ms.mean(j, k, Xk) + eps[:, j - 1]
        C = _censoring_times(cfg, k, Xk, rng)
        if C is None:
            T[rows] = Y[rows, 0]
        else:
            T[rows] = np.minimum(Y[rows, 0], C)
            events[rows] = Y[rows, 0] <= C

    specs = [ResponseSpec(name="resp1", kind="right_censored")]
    specs += [ResponseSpec(name=f"resp{j}", kind="complete") for j in range(2, cfg.J + 1)]
    complete = {f"resp{j}": Y[:, j - 1].copy() for j in range(2, cfg.J + 1)}
    manifest = {
        "schema": "ptselect.dataset/1",
        "arm_column": "arm",
        "covariates": [f"x{i}" for i in range(1, R_COVARIATES + 1)],
        "responses": [
            {
                "name": "resp1",
                "kind": "right_censored",
                "transform": "identity",
                "time_column": "resp1_time",
                "event_column": "resp1_event",
            }
        ]
        + [
            {"name": f"resp{j}", "kind": "complete", "transform": "identity", "column": f"resp{j}"}
            for j in range(2, cfg.J + 1)
        ],
    }
    return TrialDataset(
        arms=arms,
        X=X,
        specs=tuple(specs),
        complete=complete,
        censored={"resp1": (T, events)},
        covariate_names=tuple(f"x{i}" for i in range(1, R_COVARIATES + 1)),
        arm_names=tuple(f"arm-{k}" for k in range(1, cfg.K + 1)),
        manifest=manifest,
    )


def truth_label(cfg: ScenarioConfig, x0, rng: np.random.Generator) -> int:
    """Stochastic ground-truth arm at x0.

    Draws one fresh response vector per arm with the scenario's error law,
    ranks each response across arms, and aggregates with the scenario
    weights; the top-ranked arm is the label. Repeated calls estimate the
    label distribution at x0.
    """
    ms = model_set(cfg.model_set)
    x0 = np.asarray(x0, dtype=float)
    y0 = np.empty((cfg.J, cfg.K))
    for k in range(1, cfg.K + 1):
        eps = _draw_errors(cfg, 1, rng)[0]
        for j in range(1, cfg.J + 1):
            y0[j - 1, k - 1] = float(ms.mean(j, k, x0[None, :])[0]) + eps[j - 1]
    lists = tuple(ranks_from_values(y0[j], rng) for j in range(cfg.J))
    problem = AggregationProblem(lists=lists, weights=cfg.weights, rho=cfg.rho)
    v_star = aggregate_exact(problem, rng)
    return v_star.index(1) + 1


@dataclass(frozen=True)
class AccuracyReport:
    """Outcome of a scenario run; excluded counts failed replicates."""

    scenario: dict
    replicates: int
    hits: int
    misses: int
    excluded: int
    accuracy: float
    ci_low: float
    ci_high: float
    per_replicate: tuple[dict, ...]
    failures: tuple[tuple[int, str], ...]
    wall_clock_s: float
    failed_threshold_exceeded: bool = False

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema": "ptselect.accuracy_report/1",
            "scenario": self.scenario,
            "replicates": self.replicates,
            "hits": self.hits,
            "misses": self.misses,
            "excluded": self.excluded,
            "accuracy": self.accuracy,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "failures": [list(f) for f in self.failures],
            "failed_threshold_exceeded": self.failed_threshold_exceeded,
            "per_replicate": list(self.per_replicate),
        }
        if include_timing:
            d["wall_clock_s"] = self.wall_clock_s
        return d


_PRESET_WEIGHTS = {4: (0.7, 0.1, 0.1, 0.1), 3: (0.8, 0.1, 0.1)}


def scenario_preset(name: str, replicates: int | None = None, seed: int = 0) -> ScenarioConfig:
    """Named scenario: ``ms<set>-j<J>-n<n>-<censoring>``.

    Censoring is one of none, random25, random50, covdep25, covdep50.
    Unequal weights put most mass on the censored response; sigma=0.1,
    error correlation 0.3, normal errors. Large-n presets trade optimizer
    budget for runtime; both censoring settings of a preset share a budget
    so within-scenario comparisons stay apples-to-apples.
    """
    parts = name.split("-")
    try:
        set_id = int(parts[0].removeprefix("ms"))
        J = int(parts[1].removeprefix("j"))
        n = int(parts[2].removeprefix("n"))
        cens_name = parts[3]
    except (IndexError, ValueError):
        raise ValueError(f"bad preset name {name!r}; expected e.g. ms1-j4-n100-none") from None
    if cens_name == "none":
        censoring = CensoringSpec(kind="none")
    else:
        kind = "random" if cens_name.startswith("random") else "covdep"
        censoring = censoring_preset(set_id, kind, int(cens_name[-2:]))
    big = n >= 400
    return ScenarioConfig(
        model_set=set_id,
        J=J,
        n=n,
        sigma=0.1,
        error_corr=0.3,
        error_dist="normal",
        censoring=censoring,
        weights=_PRESET_WEIGHTS[J],
        replicates=replicates if replicates is not None else 200,
        seed=seed,
        optimizer_restarts=5 if big else 10,
        optimizer_max_evals=120 if big else 250,
    )


def _wilson_interval(hits: int, total: int, z: float = 1.96) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    p = hits / total
    denom = 1.0 + z**2 / total
    center = (p + z**2 / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z**2 / (4 * total**2)) / denom
    return center - half, center + half


# Namespaces for per-replicate stream derivation.
_NS_DATA = 11
_NS_X0 = 12
_NS_TRUTH = 13
_NS_ENGINE = 14
_NS_RECOMMEND_SEED = 15


def run_replicate(cfg: ScenarioConfig, index: int) -> dict:
    """One generate -> fit -> recommend -> label cycle; fully deterministic
    in (cfg.seed, index)."""
    data_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _NS_DATA, index)))
    ds = generate_replicate(cfg, data_rng)
    engine_seed = int(
        np.random.SeedSequence((cfg.seed, _NS_ENGINE, index)).generate_state(1)[0]
    )
    config = EngineConfig(
        seed=engine_seed,
        restarts=cfg.optimizer_restarts,
        max_evals=cfg.optimizer_max_evals,
        rho=cfg.rho,
    )
    eng = fit_engine(ds, config=config)
    x0_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _NS_X0, index)))
    x0 = x0_rng.uniform(-1.0, 1.0, size=R_COVARIATES)
    rec_seed = int(
        np.random.SeedSequence((cfg.seed, _NS_RECOMMEND_SEED, index)).generate_state(1)[0]
    )
    rec = recommend(eng, x0, cfg.weights, rho=cfg.rho, seed=rec_seed)
    truth_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _NS_TRUTH, index)))
    truth = truth_label(cfg, x0, truth_rng)
    return {
        "replicate": index,
        "k_star": rec.k_star,
        "truth": truth,
        "hit": rec.k_star == truth,
        "low_confidence": bool(rec.flags["low_confidence_strata"]),
    }


def run_scenario(cfg: ScenarioConfig, progress=None) -> AccuracyReport:
    """Run all replicates and summarize selection accuracy.

    Failed replicates are excluded and reported; the report is marked failed
    when exclusions reach 2% of the configured replicates.
    """
    t0 = time.perf_counter()
    rows: list[dict] = []
    failures: list[tuple[int, str]] = []
    for i in range(cfg.replicates):
        try:
            rows.append(run_replicate(cfg, i))
        except Exception as exc:
            failures.append((i, f"{type(exc).__name__}: {exc}"))
        if progress is not None:
            progress(i + 1, cfg.replicates)
    hits = sum(1 for row in rows if row["hit"])
    misses = len(rows) - hits
    excluded = len(failures)
    total = len(rows)
    accuracy = hits / total if total else 0.0
    lo, hi = _wilson_interval(hits, total)
    return AccuracyReport(
        scenario=cfg.to_dict(),
        replicates=cfg.replicates,
        hits=hits,
        misses=misses,
        excluded=excluded,
        accuracy=accuracy,
        ci_low=lo,
        ci_high=hi,
        per_replicate=tuple(rows),
        failures=tuple(failures),
        wall_clock_s=time.perf_counter() - t0,
        failed_threshold_exceeded=excluded >= 0.02 * cfg.replicates and excluded > 0,
    )
