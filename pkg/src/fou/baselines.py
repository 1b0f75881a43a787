"""AR and ARMA reference models for the prediction comparisons.

Yule-Walker for pure AR (Toeplitz solve on the biased empirical ACF, hence
stationary by construction); conditional-sum-of-squares for ARMA, minimized
by the same multi-start simplex engine the process estimator uses. CSS
conditions on zero pre-sample values and residuals, the textbook
(Box-Jenkins) conditional likelihood shortcut.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.signal import lfilter

from ._optim import latin_hypercube, multistart_minimize
from .errors import DegenerateSeries
from .estimator import SeriesSample, empirical_acf, to_original_units
from .foucore import _LARGE
from .predictor import ForecastResult

__all__ = ["ArmaModel", "fit_ar_yule_walker", "fit_arma_css", "aic", "arma_one_step"]

_ROOT_MARGIN = 1.0 + 1e-6


@dataclass(frozen=True)
class ArmaModel:
    ar_coeffs: tuple[float, ...]
    ma_coeffs: tuple[float, ...]
    noise_var: float
    mean: float = 0.0

    def __post_init__(self):
        ar = tuple(float(c) for c in self.ar_coeffs)
        ma = tuple(float(c) for c in self.ma_coeffs)
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        if ar and _min_root_modulus(_ar_roots(ar)) <= 1.0:
            raise ValueError("AR polynomial has a root inside the unit circle")
        object.__setattr__(self, "ar_coeffs", ar)
        object.__setattr__(self, "ma_coeffs", ma)

    @property
    def p(self) -> int:
        return len(self.ar_coeffs)

    @property
    def q(self) -> int:
        return len(self.ma_coeffs)

    def label(self) -> str:
        if self.q == 0:
            return f"AR({self.p})"
        return f"ARMA({self.p},{self.q})"


def _ar_roots(ar) -> np.ndarray:
    if not len(ar):
        return np.array([])
    return np.roots(list(reversed([-c for c in ar])) + [1.0])


def _ma_roots(ma) -> np.ndarray:
    if not len(ma):
        return np.array([])
    return np.roots(list(reversed(list(ma))) + [1.0])


def _min_root_modulus(roots: np.ndarray) -> float:
    # zero high-order coefficients drop the degree; no roots = no constraint
    return float(np.abs(roots).min()) if roots.size else np.inf


def _css_residuals(x: np.ndarray, ar, ma) -> np.ndarray:
    b = np.concatenate([[1.0], -np.asarray(ar, dtype=float)]) if len(ar) else np.array([1.0])
    a = np.concatenate([[1.0], np.asarray(ma, dtype=float)]) if len(ma) else np.array([1.0])
    return lfilter(b, a, x)


def fit_ar_yule_walker(series: SeriesSample, p: int) -> ArmaModel:
    """Yule-Walker AR(p) from the biased empirical autocovariance."""
    x = series.values
    n = x.size
    if not 1 <= p < n / 4:
        raise ValueError("need 1 <= p < n/4")
    g = empirical_acf(series, p)
    if g[0] <= 0 or not np.isfinite(g[0]):
        raise DegenerateSeries("zero-variance series")
    phi = solve_toeplitz(g[:p], g[1:p + 1])
    noise_var = float(g[0] - np.dot(phi, g[1:p + 1]))
    return ArmaModel(ar_coeffs=tuple(phi), ma_coeffs=(), noise_var=max(noise_var, 1e-300),
                     mean=float(x.mean()))


def _reflect_roots(coeffs, kind: str) -> tuple[float, ...]:
    """Move any root inside the unit circle to its reciprocal conjugate."""
    if not len(coeffs):
        return ()
    roots = _ar_roots(coeffs) if kind == "ar" else _ma_roots(coeffs)
    if _min_root_modulus(roots) > 1.0:
        return tuple(float(c) for c in coeffs)
    roots = np.where(np.abs(roots) < 1.0, 1.0 / np.conj(roots), roots)
    # rebuild polynomial with constant term renormalized to 1
    poly = np.poly(roots)
    poly = poly / poly[-1]
    body = poly[:-1][::-1]  # coefficients of z^1..z^k
    out = -body if kind == "ar" else body
    return tuple(float(np.real(c)) for c in out)


def fit_arma_css(series: SeriesSample, p: int, q: int, restarts: int = 8,
                 seed: int = 0) -> ArmaModel:
    """Conditional-sum-of-squares ARMA(p,q) by multi-start simplex.

    First restart is the all-zeros point (always finite), so the search
    cannot fail outright; remaining starts are Latin-hypercube draws in
    [-0.9, 0.9]^(p+q). Candidates with AR or MA roots on or inside the unit
    circle are penalized, which keeps the residual recursion stable and the
    returned model stationary and invertible; roots are reflected afterwards
    as a final guard.
    """
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError("need p, q >= 0 and p + q >= 1")
    x = series.values - series.values.mean()
    n = x.size

    def css(theta):
        ar, ma = theta[:p], theta[p:]
        if p and _min_root_modulus(_ar_roots(ar)) <= _ROOT_MARGIN:
            return _LARGE
        if q and _min_root_modulus(_ma_roots(ma)) <= _ROOT_MARGIN:
            return _LARGE
        eps = _css_residuals(x, ar, ma)
        val = float(np.dot(eps[p:], eps[p:]))
        return val if np.isfinite(val) else _LARGE

    rng = np.random.Generator(np.random.Philox(int(seed)))
    starts = np.zeros((max(1, restarts), p + q))
    if restarts > 1:
        starts[1:] = (latin_hypercube(restarts - 1, p + q, rng) - 0.5) * 1.8
    res = multistart_minimize(css, starts, maxiter=2000)
    ar = _reflect_roots(tuple(res.x[:p]), "ar")
    ma = _reflect_roots(tuple(res.x[p:]), "ma")
    eps = _css_residuals(x, ar, ma)
    noise_var = float(np.dot(eps[p:], eps[p:])) / max(n - p, 1)
    return ArmaModel(ar_coeffs=ar, ma_coeffs=ma, noise_var=max(noise_var, 1e-300),
                     mean=float(series.values.mean()))


def aic(model: ArmaModel, series: SeriesSample) -> float:
    """Gaussian AIC from CSS residuals: n log(sigma^2) + 2(p+q+1), lower is better."""
    x = series.values - model.mean
    n = x.size
    eps = _css_residuals(x, model.ar_coeffs, model.ma_coeffs)
    sig2 = float(np.dot(eps[model.p:], eps[model.p:])) / max(n - model.p, 1)
    return n * np.log(max(sig2, 1e-300)) + 2 * (model.p + model.q + 1)


def arma_one_step(model: ArmaModel, series: SeriesSample, m: int) -> ForecastResult:
    """Recursive one-step predictions for the last m points.

    Residual recursion starts at zero (same conditioning as the CSS fit);
    the prediction at index t sees observations 0..t-1 only.
    """
    x_all = series.values
    n = x_all.size
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    x = x_all - model.mean
    p, q = model.p, model.q
    ar, ma = model.ar_coeffs, model.ma_coeffs
    preds = np.zeros(n)
    eps = np.zeros(n)
    for t in range(n):
        acc = 0.0
        for i in range(1, p + 1):
            if t - i >= 0:
                acc += ar[i - 1] * x[t - i]
        for j in range(1, q + 1):
            if t - j >= 0:
                acc += ma[j - 1] * eps[t - j]
        preds[t] = acc
        eps[t] = x[t] - acc
    first = n - m
    pc = preds[first:] + model.mean
    return ForecastResult(
        predictions=to_original_units(series.preprocessing, pc, first),
        targets=to_original_units(series.preprocessing, x_all[first:], first),
        model=model, m=m, predictions_centered=pc)
