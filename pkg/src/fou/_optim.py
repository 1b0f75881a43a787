"""Multi-start derivative-free minimization shared by the fitting routines.

Nelder-Mead restarted from Latin-hypercube points in a transformed
(unconstrained) parameter space. Everything is deterministic given the seed:
starts come from a counter-based generator, restarts run in a fixed order,
and ties are broken by lowest restart index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

__all__ = ["OptimResult", "latin_hypercube", "multistart_minimize"]


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fun: float
    # best-so-far improvement points: (evaluation index, objective)
    trace: tuple[tuple[int, float], ...]
    converged: bool
    best_restart: int
    nfev: int
    all_penalized: bool


def latin_hypercube(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """n stratified points in [0,1)^dim, one per row."""
    u = rng.random((n, dim))
    out = np.empty((n, dim))
    for j in range(dim):
        out[:, j] = (rng.permutation(n) + u[:, j]) / n
    return out


def _simplex_diameter(sim: np.ndarray) -> float:
    return float(max(np.linalg.norm(sim[i] - sim[0]) for i in range(1, sim.shape[0])))


def multistart_minimize(fun, starts, *, xatol: float = 1e-9, fatol: float = 1e-15,
                        maxiter: int = 2000, simplex_tol: float = 1e-8,
                        penalty_level: float | None = None) -> OptimResult:
    """Minimize fun from every row of `starts`; keep the best.

    converged reflects the winning restart only: final simplex diameter
    below simplex_tol. When penalty_level is given, all_penalized flags the
    case where no restart ever saw an objective below it.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    nevals = 0
    trace: list[tuple[int, float]] = []
    best_fun = np.inf

    def wrapped(x):
        nonlocal nevals, best_fun
        nevals += 1
        f = float(fun(x))
        if f < best_fun:
            best_fun = f
            trace.append((nevals, f))
        return f

    best = None
    for idx, x0 in enumerate(starts):
        res = minimize(wrapped, x0, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": fatol,
                                "maxiter": maxiter, "maxfev": 4 * maxiter})
        diam = _simplex_diameter(res.final_simplex[0])
        # strict < keeps the lowest restart index on ties
        if best is None or res.fun < best[0]:
            best = (float(res.fun), idx, np.asarray(res.x, dtype=float), diam)
    fun_best, idx_best, x_best, diam_best = best
    all_pen = penalty_level is not None and not any(f < penalty_level for _, f in trace)
    return OptimResult(x=x_best, fun=fun_best, trace=tuple(trace),
                       converged=diam_best < simplex_tol, best_restart=idx_best,
                       nfev=nevals, all_penalized=all_pen)
