"""One-step-ahead Gaussian prediction under a fitted model.

For Gaussian processes the optimal one-step predictor is the conditional
mean k'Sigma^{-1}x over the full past. The Levinson-Durbin recursion walks
the prediction orders once, emitting each holdout prediction (and its
analytic conditional variance) as the order passes it, in O(n^2) time and
O(n) memory. A dense Toeplitz solve with the sampler's jitter schedule
backs it up when the recursion degenerates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularCovariance
from .estimator import SeriesSample, to_original_units
from .foucore import AcfEvaluator, FouModel
from .sampler import JITTER_SCHEDULE

__all__ = ["ForecastResult", "one_step_predictions", "one_step_conditional_variance"]


@dataclass(frozen=True)
class ForecastResult:
    predictions: np.ndarray  # original units
    targets: np.ndarray      # original units
    model: object
    m: int
    predictions_centered: np.ndarray
    conditional_variances: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.predictions, dtype=float)
        t = np.asarray(self.targets, dtype=float)
        if p.shape != t.shape or p.ndim != 1 or p.size != self.m:
            raise ValueError("predictions/targets must be 1-d of length m")
        object.__setattr__(self, "predictions", p)
        object.__setattr__(self, "targets", t)


def _levinson_predictions(gamma: np.ndarray, x: np.ndarray, wanted: set[int]):
    """One-step predictions at the requested orders via Levinson-Durbin.

    Returns (preds, variances) keyed by order j: prediction of x[j] from
    x[0..j-1] and the analytic conditional variance at that order. Raises
    ArithmeticError when the innovation variance degenerates (caller falls
    back to a dense solve).
    """
    n = x.size
    preds: dict[int, float] = {}
    vars_: dict[int, float] = {}
    v = gamma[0]
    if 0 in wanted:
        preds[0] = 0.0
        vars_[0] = float(v)
    if not v > 0:
        raise ArithmeticError("zero variance")
    phi = np.zeros(n)  # phi[1..k] live coefficients at order k
    maxo = max(wanted)
    for k in range(1, maxo + 1):
        a = (gamma[k] - float(np.dot(phi[1:k], gamma[k - 1:0:-1]))) / v
        phi[1:k] = phi[1:k] - a * phi[k - 1:0:-1]
        phi[k] = a
        v = v * (1.0 - a * a)
        if not np.isfinite(v) or v <= gamma[0] * 1e-14:
            raise ArithmeticError(f"innovation variance degenerate at order {k}")
        if k in wanted:
            preds[k] = float(np.dot(phi[1:k + 1], x[k - 1::-1]))
            vars_[k] = float(v)
    return preds, vars_


def _dense_predictions(gamma: np.ndarray, x: np.ndarray, wanted: set[int]):
    from scipy.linalg import solve_toeplitz

    preds: dict[int, float] = {}
    vars_: dict[int, float] = {}
    for j in sorted(wanted):
        if j == 0:
            preds[0], vars_[0] = 0.0, float(gamma[0])
            continue
        col = gamma[:j].copy()
        rhs = gamma[1:j + 1]
        for jit in JITTER_SCHEDULE:
            col0 = col.copy()
            col0[0] += jit * gamma[0]
            try:
                w = solve_toeplitz(col0, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.all(np.isfinite(w)):
                break
        else:
            raise SingularCovariance(
                f"prediction system singular at order {j} despite jitter")
        preds[j] = float(np.dot(w, x[j - 1::-1]))
        vars_[j] = float(gamma[0] - np.dot(w, rhs))
    return preds, vars_


def one_step_predictions(model: FouModel, series: SeriesSample, m: int) -> ForecastResult:
    """Predict each of the last m observations from everything before it.

    The model is taken to live on the centered/detrended scale of `series`;
    outputs are mapped back to original units through the recorded
    preprocessing. Predictions at index j use observations 0..j-1 only.
    """
    x = series.values
    n = x.size
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    gamma = AcfEvaluator(model).grid(np.arange(n) * series.dt)
    wanted = set(range(n - m, n))
    try:
        preds, vars_ = _levinson_predictions(gamma, x, wanted)
    except ArithmeticError:
        preds, vars_ = _dense_predictions(gamma, x, wanted)
    order = sorted(wanted)
    pc = np.array([preds[j] for j in order])
    cv = np.array([vars_[j] for j in order])
    first = n - m
    return ForecastResult(
        predictions=to_original_units(series.preprocessing, pc, first),
        targets=to_original_units(series.preprocessing, x[first:], first),
        model=model, m=m, predictions_centered=pc, conditional_variances=cv)


def one_step_conditional_variance(model: FouModel, n_past: int, dt: float) -> float:
    """Analytic Var(X_{n_past} | X_0..X_{n_past-1}) on the model's grid."""
    if n_past < 0:
        raise ValueError("n_past must be >= 0")
    gamma = AcfEvaluator(model).grid(np.arange(n_past + 1) * dt)
    if n_past == 0:
        return float(gamma[0])
    x = np.zeros(n_past + 1)
    try:
        _, vars_ = _levinson_predictions(gamma, x, {n_past})
    except ArithmeticError:
        _, vars_ = _dense_predictions(gamma, x, {n_past})
    return vars_[n_past]
