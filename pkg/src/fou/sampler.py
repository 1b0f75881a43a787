"""Path simulation.

Two independent routes, used to cross-validate each other:

  * sample_exact draws from the exact joint Gaussian law of the process on a
    grid (circulant embedding of the autocovariance when the embedding is
    PSD, dense Cholesky with a jitter schedule otherwise).
  * simulate_operator builds the process constructively: fractional Gaussian
    noise increments pushed through the exponential-smoothing operator chain.

The operator updates are the exact solution maps for a piecewise-linear
driver, so the discrete operators inherit the continuous algebra
(commutativity, the partial-fraction combination identity) to float
precision. A left-endpoint Riemann rule would satisfy neither to better than
O(dt^2) per step; see apply_ou_operator.

All randomness flows through numpy's Philox counter-based generator, pinned
here for cross-platform reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import expm

from .errors import EmbeddingNotPSD, FactorizationFailure
from .foucore import AcfEvaluator, FouModel
from .specfun import Hurst

__all__ = [
    "SampleMethod",
    "SamplePath",
    "FbmPath",
    "sample_exact",
    "sample_fbm",
    "apply_ou_operator",
    "compose_ou_operators",
    "simulate_operator",
    "operator_paths",
    "default_burn_in",
    "rng_for_seed",
]

JITTER_SCHEDULE = (0.0, 1e-12, 1e-10, 1e-8)


class SampleMethod(Enum):
    EXACT_GAUSSIAN = "exact-gaussian"
    OPERATOR_ITERATION = "operator-iteration"


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray
    dt: float
    t0: float = 0.0
    seed: int | None = None
    method: SampleMethod | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("values must be a nonempty 1-d array")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class FbmPath:
    """Fractional Gaussian noise increments on a grid (Var = dt^{2H})."""

    increments: np.ndarray
    hurst: Hurst
    dt: float

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float)
        if inc.ndim != 1 or inc.size < 1:
            raise ValueError("increments must be a nonempty 1-d array")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        h = self.hurst if isinstance(self.hurst, Hurst) else Hurst(float(self.hurst))
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "hurst", h)

    def __len__(self):
        return self.increments.size


def rng_for_seed(seed: int) -> np.random.Generator:
    # Philox: counter-based, identical streams on every platform
    return np.random.Generator(np.random.Philox(int(seed)))


# ---------------------------------------------------------------------------
# stationary Gaussian sampling


def _circulant_paths(gamma_row: np.ndarray, npaths: int, rng: np.random.Generator) -> np.ndarray:
    """Draw stationary Gaussian paths with autocovariance gamma_row[k].

    Circulant embedding of the n x n Toeplitz covariance into size 2(n-1);
    each complex spectral draw yields two independent real paths. Raises
    EmbeddingNotPSD when the embedding eigenvalues go negative.
    """
    n = gamma_row.size
    if n == 1:
        return np.sqrt(gamma_row[0]) * rng.standard_normal((npaths, 1))
    r = np.concatenate([gamma_row, gamma_row[-2:0:-1]])
    m = r.size
    ev = np.fft.fft(r).real
    floor = -1e-10 * float(np.abs(ev).max())
    if ev.min() < floor:
        raise EmbeddingNotPSD(f"min embedding eigenvalue {ev.min():.3e}")
    ev = np.maximum(ev, 0.0)
    ndraw = (npaths + 1) // 2
    Z = rng.standard_normal((ndraw, m)) + 1j * rng.standard_normal((ndraw, m))
    Y = np.fft.ifft(np.sqrt(ev) * Z, axis=1) * np.sqrt(m)
    out = np.empty((2 * ndraw, n))
    out[0::2] = Y.real[:, :n]
    out[1::2] = Y.imag[:, :n]
    return out[:npaths]


def _cholesky_paths(gamma_row: np.ndarray, npaths: int, rng: np.random.Generator) -> np.ndarray:
    from scipy.linalg import toeplitz

    cov = toeplitz(gamma_row)
    g0 = gamma_row[0]
    for jit in JITTER_SCHEDULE:
        try:
            L = np.linalg.cholesky(cov + jit * g0 * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            continue
        z = rng.standard_normal((cov.shape[0], npaths))
        return (L @ z).T
    raise FactorizationFailure(
        "covariance not factorizable at jitter ceiling "
        f"{JITTER_SCHEDULE[-1]:g}; autocovariance is not PSD"
    )


def _stationary_paths(gamma_row, npaths, rng):
    try:
        return _circulant_paths(gamma_row, npaths, rng)
    except EmbeddingNotPSD:
        return _cholesky_paths(gamma_row, npaths, rng)


def sample_exact(model: FouModel, n: int, dt: float, seed: int) -> SamplePath:
    """One draw from the exact Gaussian law on the grid 0, dt, ..., (n-1)dt.

    Deterministic per (model, n, dt, seed).
    """
    path = exact_paths(model, n, dt, seed, npaths=1)[0]
    return SamplePath(values=path, dt=dt, seed=seed, method=SampleMethod.EXACT_GAUSSIAN)


def exact_paths(model: FouModel, n: int, dt: float, seed: int, npaths: int) -> np.ndarray:
    """Batch version of sample_exact: (npaths, n) array, one RNG stream."""
    if not (1 <= n <= 16384):
        raise ValueError("n must be in 1..16384 for dense-path sampling")
    if not dt > 0:
        raise ValueError("dt must be positive")
    ev = AcfEvaluator(model)
    gamma_row = ev.grid(np.arange(n) * dt)
    return _stationary_paths(gamma_row, npaths, rng_for_seed(seed))


def fgn_autocovariance(H, dt: float, nlags: int) -> np.ndarray:
    h = H.value if isinstance(H, Hurst) else float(H)
    k = np.arange(nlags, dtype=float)
    a = 2.0 * h
    return dt ** a / 2.0 * (np.abs(k + 1) ** a - 2 * np.abs(k) ** a + np.abs(k - 1) ** a)


def sample_fbm(H, n: int, dt: float, seed: int) -> FbmPath:
    """Fractional Gaussian noise by circulant embedding.

    Any n works (no power-of-two requirement); the fGn embedding is PSD for
    H in [1/2, 1), with a dense fallback kept anyway per the sampling
    contract.
    """
    inc = fgn_paths(H, n, dt, seed, npaths=1)[0]
    return FbmPath(increments=inc, hurst=H if isinstance(H, Hurst) else Hurst(float(H)), dt=dt)


def fgn_paths(H, n: int, dt: float, seed: int, npaths: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    row = fgn_autocovariance(H, dt, n)
    return _stationary_paths(row, npaths, rng_for_seed(seed))


# ---------------------------------------------------------------------------
# operator route


def default_burn_in(model_or_rates, dt: float) -> int:
    """ceil(20 / (lambda_min * dt)): twenty e-folding times of the slowest mode."""
    if isinstance(model_or_rates, FouModel):
        rates = model_or_rates.rate_values
    else:
        rates = tuple(model_or_rates)
    return int(np.ceil(20.0 / (min(rates) * dt)))


def _driver_increments(path) -> tuple:
    if isinstance(path, FbmPath):
        return np.asarray(path.increments, dtype=float), path.dt
    if isinstance(path, SamplePath):
        vals = np.asarray(path.values, dtype=float)
        # integrator semantics with zero initial state: first increment is
        # the first value itself
        return np.diff(vals, prepend=0.0), path.dt
    raise TypeError("path must be FbmPath or SamplePath")


def apply_ou_operator(path, lam: float, burn_in: int = 0) -> SamplePath:
    """Single exponential-smoothing operator on a driving path.

    Discrete recursion y_k = e^{-lam dt} y_{k-1} + b * dx_k with
    b = (1 - e^{-lam dt})/(lam dt): the exact update when the driver is
    interpolated linearly across each step. (The left-point rule
    b = 1 would break the composition/combination algebra at O(dt^2) per
    step; this choice keeps the discrete operators an exact homomorphic
    image of the continuous ones for the interpolated driver.)

    The first burn_in outputs are dropped to approximate stationarity of the
    integral from the infinite past.
    """
    if not lam > 0:
        raise ValueError("rate must be positive")
    dx, dt = _driver_increments(path)
    if not 0 <= burn_in < dx.size:
        raise ValueError("burn_in must leave at least one retained point")
    a = np.exp(-lam * dt)
    b = (1.0 - a) / (lam * dt)
    y = _lfilter_ar1(a, b * dx)
    return SamplePath(values=y[burn_in:], dt=dt, t0=burn_in * dt,
                      method=SampleMethod.OPERATOR_ITERATION)


def _lfilter_ar1(a: float, forcing: np.ndarray) -> np.ndarray:
    from scipy.signal import lfilter

    return lfilter([1.0], [1.0, -a], forcing)


def _chain_matrices(rates, dt: float):
    p = len(rates)
    A = np.zeros((p, p))
    for i, lam in enumerate(rates):
        A[i:, i] = -lam
    E = expm(A * dt)
    M = np.linalg.solve(A, E - np.eye(p)) @ np.ones(p) / dt
    return E, M


def compose_ou_operators(path, rates, burn_in: int = 0) -> SamplePath:
    """Apply the full operator chain jointly (exact for the linear driver).

    Solving the coupled chain in one exact step is what preserves the
    combination identity sum_i K_i T_i = composed chain at float precision;
    feeding each stage the previous stage's output as if it were again
    piecewise linear would not.
    """
    rates = [float(r) for r in rates]
    if not rates or any(r <= 0 for r in rates):
        raise ValueError("rates must be positive and nonempty")
    dx, dt = _driver_increments(path)
    if not 0 <= burn_in < dx.size:
        raise ValueError("burn_in must leave at least one retained point")
    E, M = _chain_matrices(rates, dt)
    y = _run_chain(E, M, dx[None, :])[0]
    return SamplePath(values=y[burn_in:], dt=dt, t0=burn_in * dt,
                      method=SampleMethod.OPERATOR_ITERATION)


def _run_chain(E: np.ndarray, M: np.ndarray, dx: np.ndarray) -> np.ndarray:
    # dx: (npaths, nsteps); returns last chain component, same shape
    npaths, nsteps = dx.shape
    p = M.size
    S = np.zeros((p, npaths))
    out = np.empty((npaths, nsteps))
    for k in range(nsteps):
        S = E @ S + np.outer(M, dx[:, k])
        out[:, k] = S[-1]
    return out


def simulate_operator(model: FouModel, n: int, dt: float, seed: int,
                      burn_in: int | None = None) -> SamplePath:
    """Constructive simulation: fGn driver through the operator chain."""
    return SamplePath(
        values=operator_paths(model, n, dt, seed, npaths=1, burn_in=burn_in)[0],
        dt=dt, seed=seed, method=SampleMethod.OPERATOR_ITERATION,
    )


def operator_paths(model: FouModel, n: int, dt: float, seed: int, npaths: int,
                   burn_in: int | None = None) -> np.ndarray:
    """Batch operator-route paths, (npaths, n), burn-in already removed."""
    if burn_in is None:
        burn_in = default_burn_in(model, dt)
    ntot = n + burn_in
    dx = model.sigma * fgn_paths(model.hurst, ntot, dt, seed, npaths)
    E, M = _chain_matrices(model.expanded_rates(), dt)
    y = _run_chain(E, M, dx)
    return y[:, burn_in:]
