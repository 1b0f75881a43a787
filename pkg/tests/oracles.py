"""Independent reference implementations used to validate the package.

Everything here is deliberately written from the defining integrals and
first-principles formulas, not from the production code paths:

* ``fh_reference`` evaluates the covariance kernel's special function with
  40-digit mpmath arithmetic straight from its integral definition.
* ``gamma_jj_reference`` computes covariances of (degree-weighted) OU
  integrals of fractional Brownian motion by nested adaptive quadrature of
  the double integral, splitting at the |t - u + v| kink.
* ``acf_reference_distinct`` / ``acf_reference_repeated`` assemble process
  autocovariances from those double integrals using the partial-fraction
  weights (distinct rates) or binomial degree weights (repeated rate).
* ``willmott_reference`` et al. recompute the agreement metrics from their
  printed formulas.

The production code never imports this module.
"""

import math

import mpmath as mp
import numpy as np
from scipy.integrate import quad

mp.mp.dps = 40


# ---------------------------------------------------------------------------
# special function oracle

def fh1_reference(x, H):
    """e^{-x} (Gamma(2H) - int_0^x e^s s^{2H-1} ds), exact arithmetic."""
    x = mp.mpf(x)
    a = mp.mpf(2 * H)
    inner = mp.quad(lambda s: mp.e ** s * s ** (a - 1), [0, x])
    return mp.e ** (-x) * (mp.gamma(a) - inner)


def fh2_reference(x, H):
    """e^x Gamma(2H, x), the scaled upper incomplete gamma."""
    x = mp.mpf(x)
    a = mp.mpf(2 * H)
    return mp.e ** x * mp.gammainc(a, x, mp.inf)


def fh_reference(x, H) -> float:
    return float(fh1_reference(x, H) + fh2_reference(x, H))


def mixed_decay_reference(alpha, beta, x, H) -> float:
    return float(alpha ** (1 - 2 * H) * fh1_reference(alpha * x, H)
                 + beta ** (1 - 2 * H) * fh2_reference(beta * x, H))


# ---------------------------------------------------------------------------
# double-integral covariance oracle
#
# gamma^{(j,j')}(t) = E[ T^{(j)}_lam(sig B_H)(t) * T^{(j')}_lam'(sig B_H)(0) ]
# where T^{(h)}_lam carries the kernel e^{-lam u} (-lam u)^h / h!.  Written
# against the H > 1/2 covariation identity with kernel |t - u + v|^{2H-2};
# the inner integral is split at its kink and the outer one at w = t.

def gamma_jj_reference(lam, lamp, sigma, H, t, j=0, jp=0) -> float:
    pref = (sigma ** 2 * H * (2 * H - 1) * lam ** j * lamp ** jp
            * (-1) ** (j + jp) / (math.factorial(j) * math.factorial(jp)))

    def inner(w):
        f = lambda v: np.exp(-lamp * v) * v ** jp * abs(v + t - w) ** (2 * H - 2)
        kink = w - t
        if kink <= 0:
            return quad(f, 0, np.inf, limit=200)[0]
        head = quad(f, 0, kink, limit=200, points=[kink])[0]
        return head + quad(f, kink, np.inf, limit=200)[0]

    outer = lambda w: np.exp(-lam * w) * w ** j * inner(w)
    if t > 0:
        total = quad(outer, 0, t, limit=200)[0] + quad(outer, t, np.inf, limit=200)[0]
    else:
        total = quad(outer, 0, np.inf, limit=200)[0]
    return pref * total


def cross_cov_reference(lam1, lam2, sigma, H, t) -> float:
    """E[X_{lam1}(t) X_{lam2}(0)] for t >= 0, single-rate components."""
    if t < 0:
        return gamma_jj_reference(lam1, lam2, sigma, H, -t)
    return gamma_jj_reference(lam2, lam1, sigma, H, t)


def k_weights_reference(lams):
    lams = np.asarray(lams, dtype=float)
    return np.array([1.0 / np.prod([1.0 - lj / li
                                    for j, lj in enumerate(lams) if j != i])
                     for i, li in enumerate(lams)])


def acf_reference_distinct(lams, sigma, H, t) -> float:
    """gamma(t) = sum_{i,j} K_i K_j gamma^{(0,0)}_{lam_i, lam_j}(t)."""
    ks = k_weights_reference(lams)
    return sum(ks[i] * ks[j] * gamma_jj_reference(li, lj, sigma, H, abs(t))
               for i, li in enumerate(lams) for j, lj in enumerate(lams))


def acf_reference_repeated(lam, mult, sigma, H, t) -> float:
    """Single rate with multiplicity m.

    Composing the OU operator m times onto the same path yields the kernel
    e^{-lam u} sum_h C(m-1, h) (-lam u)^h / h!, so the autocovariance is the
    binomially weighted sum of the degree-pair covariances.
    """
    w = [math.comb(mult - 1, h) for h in range(mult)]
    return sum(w[j] * w[jp] * gamma_jj_reference(lam, lam, sigma, H, abs(t), j, jp)
               for j in range(mult) for jp in range(mult))


# ---------------------------------------------------------------------------
# metric references (straight from the printed formulas)

def willmott_reference(targets, preds, power=2, literal=False) -> float:
    t = np.asarray(targets, dtype=float)
    p = np.asarray(preds, dtype=float)
    tbar = t.mean()
    num = np.sum(np.abs(t - p) ** power)
    if literal:
        base = 2.0 * np.abs(p - tbar)
    else:
        base = np.abs(p - tbar) + np.abs(t - tbar)
    return float(1.0 - num / np.sum(base ** power))


def rmse_reference(targets, preds) -> float:
    t = np.asarray(targets, dtype=float)
    p = np.asarray(preds, dtype=float)
    return float(np.sqrt(np.mean((t - p) ** 2)))


def mae_reference(targets, preds) -> float:
    t = np.asarray(targets, dtype=float)
    p = np.asarray(preds, dtype=float)
    return float(np.mean(np.abs(t - p)))
