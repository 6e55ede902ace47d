"""Single-index model estimation by leave-one-out least squares.

Fits Y = g(beta'X) + eps with unknown smooth link g and unit index vector
beta, by jointly minimizing the leave-one-out kernel-regression criterion
over (beta, bandwidth). A reweighted variant handles right-censored
responses: uncensored observations carry inverse-probability-of-censoring
weights and censored ones are skipped entirely, in both the inner link
estimate and the outer sum of squares.

The optimizer is Nelder-Mead over (spherical angles of beta, log bandwidth),
restarted from the weighted-least-squares direction plus random unit
vectors; the best restart wins. Sign indeterminacy (g absorbs the sign of
beta) is resolved by making the first nonzero coordinate of beta
nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import minimize

from .errors import DegenerateDesign, OptimFailed, TooFewEvents
from .smoothing import Kernel, gaussian_kernel, nw_smooth_widened, plugin_bandwidth
from .survival import WeightTable

__all__ = [
    "SimFit",
    "FitOptions",
    "fit_sim_complete",
    "fit_sim_ipcw",
    "predict_link",
    "predict_link_values",
]


@dataclass(frozen=True)
class SimFit:
    """A fitted single-index model plus the training cache for link evaluation.

    ``train_weights`` holds the usage weight of each training row (1 for
    complete data; event indicator over censoring survival probability in
    censored mode, so censored rows carry weight 0).
    """

    beta: np.ndarray
    bandwidth: float
    train_index: np.ndarray
    train_y: np.ndarray
    train_weights: np.ndarray
    train_events: np.ndarray
    objective_value: float
    restart_objectives: tuple[float, ...]
    censored_mode: bool

    @property
    def r(self) -> int:
        return self.beta.size


@dataclass(frozen=True)
class FitOptions:
    """Optimizer budget and smoothing-search box for one fit."""

    restarts: int = 10
    max_evals: int = 250
    xatol: float = 1e-3
    fatol: float = 1e-10
    simplex_step: float = 0.35
    h_bounds_factor: tuple[float, float] = (1e-3, 10.0)
    min_events_margin: int = 2  # require at least r + this many usable rows


@njit(cache=True)
def _loo_objective(v: np.ndarray, y: np.ndarray, w: np.ndarray, h: float) -> float:
    """Weighted leave-one-out Nadaraya-Watson sum of squares.

    Rows with zero weight contribute to neither the inner link estimate nor
    the outer sum. Returns inf if any leave-one-out denominator underflows.
    """
    n = v.shape[0]
    total = 0.0
    for i in range(n):
        if w[i] == 0.0:
            continue
        num = 0.0
        den = 0.0
        for l in range(n):
            if l == i or w[l] == 0.0:
                continue
            u = (v[i] - v[l]) / h
            k = w[l] * np.exp(-0.5 * u * u)
            num += k * y[l]
            den += k
        if den <= 1e-300:
            return np.inf
        resid = y[i] - num / den
        total += w[i] * resid * resid
    return total


def _angles_to_unit(theta: np.ndarray, r: int) -> np.ndarray:
    beta = np.empty(r)
    sin_prod = 1.0
    for i in range(r - 1):
        beta[i] = sin_prod * np.cos(theta[i])
        sin_prod *= np.sin(theta[i])
    beta[r - 1] = sin_prod
    return beta


def _unit_to_angles(u: np.ndarray) -> np.ndarray:
    r = u.size
    theta = np.empty(r - 1)
    for i in range(r - 2):
        tail = float(np.sqrt(np.sum(u[i + 1 :] ** 2)))
        theta[i] = np.arctan2(tail, u[i])
    theta[r - 2] = np.arctan2(u[r - 1], u[r - 2])
    return theta


def _wls_direction(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted linear-regression coefficient direction as an initial guess."""
    sw = np.sqrt(w)
    A = np.column_stack([np.ones(X.shape[0]), X]) * sw[:, None]
    coef, *_ = np.linalg.lstsq(A, y * sw, rcond=None)
    d = coef[1:]
    nrm = float(np.linalg.norm(d))
    if nrm < 1e-12:
        d = np.zeros(X.shape[1])
        d[0] = 1.0
        return d
    return d / nrm


def _fit_core(
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    events: np.ndarray,
    rng: np.random.Generator,
    options: FitOptions,
    censored_mode: bool,
) -> SimFit:
    n, r = X.shape
    active = weights > 0
    n_active = int(active.sum())
    min_needed = r + options.min_events_margin + (0 if censored_mode else 1)
    if n_active < min_needed:
        if censored_mode:
            raise TooFewEvents(f"{n_active} usable rows for {r} index coordinates")
        raise ValueError(f"n={n_active} too small for r={r}")
    if np.linalg.matrix_rank(X - X.mean(axis=0)) < r:
        raise DegenerateDesign("covariate columns collinear to working precision")

    Xa, ya, wa = X[active], y[active], weights[active]

    starts = [_wls_direction(Xa, ya, wa)]
    for _ in range(options.restarts - 1):
        d = rng.standard_normal(r)
        starts.append(d / np.linalg.norm(d))

    lo_f, hi_f = options.h_bounds_factor
    best_z = None
    best_val = np.inf
    best_bounds = None
    restart_vals: list[float] = []
    for direction in starts:
        v0 = Xa @ direction
        try:
            h0 = plugin_bandwidth(v0)
        except Exception:
            h0 = 1.0
        log_lo, log_hi = np.log(h0 * lo_f), np.log(h0 * hi_f)

        if r == 1:
            z0 = np.array([np.log(h0)])
        else:
            z0 = np.concatenate([_unit_to_angles(direction), [np.log(h0)]])

        def objective(z, _lo=log_lo, _hi=log_hi):
            logh = z[-1]
            if logh < _lo or logh > _hi:
                return np.inf
            beta = _angles_to_unit(z[:-1], r) if r > 1 else np.array([1.0])
            return _loo_objective(Xa @ beta, ya, wa, float(np.exp(logh)))

        d = z0.size
        simplex = np.vstack([z0] + [z0 + options.simplex_step * np.eye(d)[i] for i in range(d)])
        res = minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={
                "maxfev": options.max_evals,
                "xatol": options.xatol,
                "fatol": options.fatol,
                "initial_simplex": simplex,
            },
        )
        restart_vals.append(float(res.fun))
        if np.isfinite(res.fun) and res.fun < best_val:
            best_val = float(res.fun)
            best_z = res.x.copy()
            best_bounds = (log_lo, log_hi)

    if best_z is None:
        raise OptimFailed("no restart produced a finite leave-one-out objective")

    beta = _angles_to_unit(best_z[:-1], r) if r > 1 else np.array([1.0])
    h = float(np.exp(np.clip(best_z[-1], *best_bounds)))
    for b in beta:
        if b != 0.0:
            if b < 0.0:
                beta = -beta
            break

    return SimFit(
        beta=beta,
        bandwidth=h,
        train_index=X @ beta,
        train_y=y.copy(),
        train_weights=weights.copy(),
        train_events=events.copy(),
        objective_value=best_val,
        restart_objectives=tuple(restart_vals),
        censored_mode=censored_mode,
    )


def fit_sim_complete(
    X,
    y,
    rng: np.random.Generator | None = None,
    options: FitOptions = FitOptions(),
) -> SimFit:
    """Fit a single-index model to fully observed responses."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    rng = rng if rng is not None else np.random.default_rng(0)
    return _fit_core(
        X,
        y,
        np.ones(n),
        np.ones(n, dtype=bool),
        rng,
        options,
        censored_mode=False,
    )


def fit_sim_ipcw(
    X,
    t,
    events,
    weights: WeightTable,
    rng: np.random.Generator | None = None,
    options: FitOptions = FitOptions(),
) -> SimFit:
    """Fit a single-index model to right-censored responses.

    ``t`` are observed times min(response, censoring time); ``events`` flags
    true responses; ``weights`` is the fitted censoring-survival table.
    Usable rows are the events, carried with weight 1/censoring-survival.
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(t, dtype=float)
    events = np.asarray(events, dtype=bool)
    usage = np.where(events, 1.0 / weights.weights, 0.0)
    return _fit_core(X, t, usage, events, rng if rng is not None else np.random.default_rng(0), options, censored_mode=True)


def predict_link(fit: SimFit, x0, kernel: Kernel | None = None) -> float:
    """Evaluate the fitted link at a new covariate vector.

    The value depends on x0 only through beta'x0. Underflow at the edge of
    the training index range is handled by the shared bandwidth-widening
    retry policy before the error propagates.
    """
    kernel = kernel if kernel is not None else gaussian_kernel()
    nu0 = float(np.asarray(x0, dtype=float) @ fit.beta)
    value, _ = nw_smooth_widened(
        fit.train_index, fit.train_y, nu0, kernel, fit.bandwidth, fit.train_weights
    )
    return value


def predict_link_values(fit: SimFit, X0, kernel: Kernel | None = None) -> np.ndarray:
    """Vectorized link evaluation over rows of X0 (same estimate as
    :func:`predict_link`, computed in bulk; underflowing rows fall back to
    the scalar widening path)."""
    kernel = kernel if kernel is not None else gaussian_kernel()
    X0 = np.asarray(X0, dtype=float)
    nu = X0 @ fit.beta
    mat = kernel((nu[:, None] - fit.train_index[None, :]) / fit.bandwidth) * fit.train_weights[None, :]
    den = mat.sum(axis=1)
    num = mat @ fit.train_y
    out = np.empty(nu.size)
    ok = den >= 1e-300
    out[ok] = num[ok] / den[ok]
    for i in np.flatnonzero(~ok):
        out[i], _ = nw_smooth_widened(
            fit.train_index, fit.train_y, float(nu[i]), kernel, fit.bandwidth, fit.train_weights
        )
    return out
