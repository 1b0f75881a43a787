"""Autocovariance-matching estimation of (lambda_1..lambda_k, sigma, H).

The criterion is the mean squared gap between the model autocovariance and
the empirical one over lags 1..h on the observation grid (lag 0 optionally
included). Minimization is multi-start Nelder-Mead in a transformed space:
log rates, log sigma, and a logit squash for H, which makes the box
constraints self-enforcing for sigma/H and leaves only the rate bounds and
the rate-collision guard as explicit penalties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._optim import latin_hypercube, multistart_minimize
from .errors import DegenerateLambdas
from .foucore import _LARGE, _min_rel_gap, AcfEvaluator, Backend, DISTINCTNESS_GUARD, FouModel

__all__ = [
    "Preprocessing",
    "SeriesSample",
    "ParamBounds",
    "FitConfig",
    "FitResult",
    "preprocess",
    "to_original_units",
    "empirical_acf",
    "objective",
    "fit",
    "fit_to_acf",
]

IDENTITY_PREPROCESSING_FIELDS = dict(detrended=False, slope=0.0, intercept=0.0,
                                     centered=False, mean=0.0)


@dataclass(frozen=True)
class Preprocessing:
    detrended: bool = False
    slope: float = 0.0
    intercept: float = 0.0
    centered: bool = False
    mean: float = 0.0


@dataclass(frozen=True)
class SeriesSample:
    """Equally spaced observations X_{T/n}, X_{2T/n}, ..., X_T."""

    values: np.ndarray
    horizon_T: float = 20.0
    preprocessing: Preprocessing = field(default_factory=Preprocessing)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 10:
            raise ValueError("need at least 10 observations in a 1-d array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("observations must be finite")
        if not self.horizon_T > 0:
            raise ValueError("horizon_T must be positive")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dt(self) -> float:
        return self.horizon_T / self.n


def preprocess(raw, detrend: bool = False, horizon_T: float = 20.0) -> SeriesSample:
    """Optional least-squares linear detrend (index grid), then mean-centering.

    Coefficients are recorded so predictions can be mapped back to original
    units; see to_original_units.
    """
    x = np.asarray(raw, dtype=float)
    if x.ndim != 1 or x.size < 10:
        raise ValueError("need at least 10 observations")
    slope = intercept = 0.0
    if detrend:
        idx = np.arange(x.size, dtype=float)
        slope, intercept = np.polyfit(idx, x, 1)
        x = x - (intercept + slope * idx)
    mean = float(x.mean())
    x = x - mean
    pre = Preprocessing(detrended=detrend, slope=float(slope),
                        intercept=float(intercept), centered=True, mean=mean)
    return SeriesSample(values=x, horizon_T=horizon_T, preprocessing=pre)


def to_original_units(pre: Preprocessing, centered, first_index: int = 0) -> np.ndarray:
    """Invert preprocess for values at consecutive indices starting at first_index."""
    y = np.asarray(centered, dtype=float)
    if pre.centered:
        y = y + pre.mean
    if pre.detrended:
        idx = first_index + np.arange(y.size, dtype=float)
        y = y + pre.intercept + pre.slope * idx
    return y


def empirical_acf(series: SeriesSample, max_lag: int, divisor: str = "n") -> np.ndarray:
    """gamma_hat(k*T/n) for k = 0..max_lag, centered, biased 1/n by default.

    The 1/n divisor keeps the empirical sequence positive semidefinite;
    divisor="n-k" gives the unbiased variant.
    """
    if divisor not in ("n", "n-k"):
        raise ValueError('divisor must be "n" or "n-k"')
    x = series.values
    n = x.size
    if not 0 <= max_lag < n:
        raise ValueError("max_lag must satisfy 0 <= max_lag < n")
    xc = x - x.mean()
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        s = float(np.dot(xc[: n - k], xc[k:]))
        out[k] = s / (n if divisor == "n" else n - k)
    return out


@dataclass(frozen=True)
class ParamBounds:
    lam: tuple[float, float] = (1e-3, 1e3)
    sigma: tuple[float, float] = (1e-6, 1e6)
    hurst: tuple[float, float] = (0.5, 0.999)


@dataclass(frozen=True)
class FitConfig:
    h_lags: int = 10
    structure: tuple[int, ...] = (1,)
    restarts: int = 32
    max_iters: int = 2000
    param_bounds: ParamBounds = field(default_factory=ParamBounds)
    seed: int = 0
    include_lag0: bool = False
    acf_divisor: str = "n"

    def __post_init__(self):
        struct = tuple(int(m) for m in self.structure)
        if not struct or any(m < 1 for m in struct):
            raise ValueError("structure must be positive multiplicities")
        if self.h_lags < 1 or self.restarts < 1 or self.max_iters < 1:
            raise ValueError("h_lags, restarts, max_iters must be positive")
        object.__setattr__(self, "structure", struct)


@dataclass(frozen=True)
class FitResult:
    model: FouModel
    objective: float
    trace: tuple[tuple[int, float], ...]
    matched_lags: tuple[tuple[float, float, float], ...]  # (lag_time, empirical, model)
    converged: bool
    status: str  # "ok" | "no-progress"
    seed: int


def _canonical_rates(rates, multiplicities):
    """Sort rates descending within groups sharing a multiplicity."""
    rates = list(rates)
    mults = list(multiplicities)
    for m in set(mults):
        pos = [i for i, mm in enumerate(mults) if mm == m]
        vals = sorted((rates[i] for i in pos), reverse=True)
        for i, v in zip(pos, vals):
            rates[i] = v
    return tuple(rates), tuple(mults)


def _make_evaluator(rates, multiplicities, sigma, hurst):
    model = FouModel.from_rates(rates, multiplicities, sigma=sigma, hurst=hurst)
    if all(m == 1 for m in multiplicities):
        # hot path stays closed-form; collisions are penalized, not routed
        # to the (much slower) spectral backend
        return AcfEvaluator(model, backend=Backend.CLOSED_FORM_DISTINCT), model
    return AcfEvaluator(model), model


def objective(params, empirical, h: int, lag_times, multiplicities=None) -> float:
    """(1/len)·sum of squared ACF gaps over the given lags.

    params is (rates, sigma, H). Candidates whose rates collide return the
    penalty value +LARGE instead of raising, so a simplex search can step
    over them.
    """
    rates, sigma, hurst = params
    rates = tuple(float(r) for r in np.atleast_1d(rates))
    if multiplicities is None:
        multiplicities = (1,) * len(rates)
    emp = np.asarray(empirical, dtype=float)
    ts = np.asarray(lag_times, dtype=float)
    if emp.shape != ts.shape:
        raise ValueError("empirical and lag_times must have equal length")
    if h != int(np.count_nonzero(ts)):
        raise ValueError("h must equal the number of nonzero lags")
    if len(rates) >= 2 and _min_rel_gap(rates) < DISTINCTNESS_GUARD:
        return _LARGE
    try:
        ev, _ = _make_evaluator(rates, multiplicities, sigma, hurst)
        model_acf = ev.grid(ts)
    except (DegenerateLambdas, ValueError):
        return _LARGE
    return float(np.mean((model_acf - emp) ** 2))


def _logit(q: float) -> float:
    return math.log(q / (1.0 - q))


def _squash_hurst(u: float, lo: float, hi: float) -> float:
    return lo + (hi - lo) / (1.0 + math.exp(-u))


def _unpack(x, k: int, bounds: ParamBounds):
    rates = tuple(float(np.exp(v)) for v in x[:k])
    sigma = float(np.exp(x[k]))
    hurst = _squash_hurst(float(x[k + 1]), bounds.hurst[0], bounds.hurst[1])
    return rates, sigma, hurst


def fit(series: SeriesSample, config: FitConfig) -> FitResult:
    """Best-of-restarts simplex minimization of the ACF-matching criterion.

    Rates are reported sorted descending within equal-multiplicity groups
    (removes permutation symmetry); two runs with the same seed return
    identical results.
    """
    n = series.n
    h = config.h_lags
    if not h < n / 2:
        raise ValueError("h_lags must be < n/2")
    dt = series.dt
    emp_full = empirical_acf(series, h, divisor=config.acf_divisor)
    lag_idx = list(range(0 if config.include_lag0 else 1, h + 1))
    lag_times = np.array([i * dt for i in lag_idx])
    return fit_to_acf(emp_full[lag_idx], lag_times, config,
                      variance_hint=float(emp_full[0]))


def fit_to_acf(empirical, lag_times, config: FitConfig,
               variance_hint: float | None = None) -> FitResult:
    """Fit directly to supplied autocovariance values at the given lags.

    This is the core of `fit`; it also lets exact theoretical ACF values be
    injected in place of empirical ones (self-consistency checks).
    variance_hint seeds the sigma coordinate of each restart by variance
    matching; when omitted the largest supplied value is used.
    """
    mults = config.structure
    k = len(mults)
    bounds = config.param_bounds
    emp = np.asarray(empirical, dtype=float)
    lag_times = np.asarray(lag_times, dtype=float)
    if emp.shape != lag_times.shape or emp.ndim != 1 or emp.size < 1:
        raise ValueError("empirical and lag_times must be equal-length 1-d")
    h = int(np.count_nonzero(lag_times))
    g0_hat = float(variance_hint) if variance_hint is not None else float(emp.max())

    # start box: the generic search window intersected with the user's rate
    # bounds, so every restart begins at a feasible point
    lam_lo = max(1e-2, bounds.lam[0])
    lam_hi = min(1e2, bounds.lam[1])
    if lam_lo >= lam_hi:
        lam_lo, lam_hi = bounds.lam
    log_lam_lo, log_lam_hi = math.log(lam_lo), math.log(lam_hi)
    width = bounds.hurst[1] - bounds.hurst[0]
    u_lo = _logit(min(max((0.51 - bounds.hurst[0]) / width, 1e-6), 1 - 1e-6))
    u_hi = _logit(min(max((0.99 - bounds.hurst[0]) / width, 1e-6), 1 - 1e-6))

    def wrapped(x):
        rates, sigma, hurst = _unpack(x, k, bounds)
        if any(not bounds.lam[0] <= r <= bounds.lam[1] for r in rates):
            return _LARGE
        if not bounds.sigma[0] <= sigma <= bounds.sigma[1]:
            return _LARGE
        rates, _ = _canonical_rates(rates, mults)
        return objective((rates, sigma, hurst), emp, h, lag_times,
                         multiplicities=mults)

    rng = np.random.Generator(np.random.Philox(int(config.seed)))
    lhs = latin_hypercube(config.restarts, k + 1, rng)
    starts = np.empty((config.restarts, k + 2))
    for i, row in enumerate(lhs):
        log_rates = log_lam_lo + row[:k] * (log_lam_hi - log_lam_lo)
        u_h = u_lo + row[k] * (u_hi - u_lo)
        rates = tuple(np.exp(log_rates))
        hurst = _squash_hurst(u_h, bounds.hurst[0], bounds.hurst[1])
        sigma0 = 1.0
        if g0_hat > 0 and (k < 2 or _min_rel_gap(rates) >= DISTINCTNESS_GUARD):
            try:
                ev1, _ = _make_evaluator(rates, mults, 1.0, hurst)
                unit_var = float(ev1(0.0))
                if unit_var > 0:
                    sigma0 = math.sqrt(g0_hat / unit_var)
            except (DegenerateLambdas, ValueError):
                pass
        # keep the start an order of magnitude off the sigma bounds when the
        # window is wide; narrow windows just clip to themselves
        sig_lo, sig_hi = bounds.sigma[0] * 10, bounds.sigma[1] / 10
        if sig_lo > sig_hi:
            sig_lo, sig_hi = bounds.sigma
        sigma0 = min(max(sigma0, sig_lo), sig_hi)
        starts[i] = np.concatenate([log_rates, [math.log(sigma0), u_h]])

    res = multistart_minimize(wrapped, starts, maxiter=config.max_iters,
                              penalty_level=_LARGE / 2)

    rates, sigma, hurst = _unpack(res.x, k, bounds)
    rates, _ = _canonical_rates(rates, mults)
    ev, model = _make_evaluator(rates, mults, sigma, hurst)
    model_acf = ev.grid(lag_times)
    matched = tuple((float(t), float(e), float(g))
                    for t, e, g in zip(lag_times, emp, model_acf))
    obj = float(np.mean((model_acf - emp) ** 2))
    status = "no-progress" if res.all_penalized else "ok"
    return FitResult(model=model, objective=obj, trace=res.trace,
                     matched_lags=matched, converged=res.converged,
                     status=status, seed=config.seed)
