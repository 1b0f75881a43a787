"""Model layer: closed-form and spectral autocovariances, cross-covariances,
partial-fraction weights, memory classification.

Frozen constants were produced by the independent double-integral oracle in
tests/oracles.py (nested adaptive quadrature of the defining covariance
integrals); worst observed oracle-vs-implementation deviation during freezing
was below 1e-9 scaled by gamma(0).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as Gamma

from fou.errors import DegenerateLambdas
from fou.foucore import (AcfEvaluator, Backend, FouModel, MemoryClass,
                         SpectralDensity, acf, cross_cov, k_coefficients,
                         memory_class, partial_fraction_check)

# --------------------------------------------------------------------------
# frozen values

# single rate, lam=1, sigma=1, H=0.75
P1_TABLE = {0.0: 0.6646701940895684, 1.0: 0.466140094151,
            10.0: 0.119598884635, 40.0: 0.059320654006}

# two distinct rates (1, 2), sigma=1, H=0.75
P2_TABLE = {0.0: 0.0917718030, 1.0: -0.0015081654}

# two distinct rates (0.7, 3.1), sigma=1.4, H=0.62
P2B_TABLE = {0.0: 0.193724483237, 1.0: -0.012973044247}

# three distinct rates (1, 2, 3), sigma=1, H=0.8
P3_TABLE = {0.0: 0.0278513341808, 0.7: -0.00436312211009}

# repeated rate 1 with multiplicity 2, sigma=1, H=0.75
REP2_TABLE = {0.0: 0.16616754852239213, 0.5: 0.0869316470, 1.0: 0.0255660057}

# repeated rate 1.3 with multiplicity 3, sigma=1, H=0.68
REP3_TABLE = {0.0: 0.089478750566, 1.0: -0.0156004675376}

# E[X_{l1}(t) X_{l2}(0)] for (l1, l2) = (1, 2), sigma=1, H=0.75
CROSS_TABLE = {(1.0, 2.0, 0.0): 0.378220998524,
               (1.0, 2.0, 0.5): 0.268662342777,
               (1.0, 2.0, 2.0): 0.130627624111,
               (2.0, 1.0, 0.5): 0.329491958853,
               (2.0, 1.0, 2.0): 0.183130796309}


def test_single_rate_frozen():
    m = FouModel.from_rates([1.0], sigma=1.0, hurst=0.75)
    for t, want in P1_TABLE.items():
        assert acf(m, t) == pytest.approx(want, rel=1e-9)


def test_single_rate_variance_closed_form():
    rng = np.random.default_rng(4)
    for _ in range(20):
        lam = float(10.0 ** rng.uniform(-1.5, 1.5))
        sig = float(10.0 ** rng.uniform(-1, 1))
        H = float(rng.uniform(0.51, 0.98))
        m = FouModel.from_rates([lam], sigma=sig, hurst=H)
        want = sig ** 2 * Gamma(2 * H + 1) / (2 * lam ** (2 * H))
        assert acf(m, 0.0) == pytest.approx(want, rel=1e-8)


def test_two_rates_frozen():
    m = FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.75)
    g0 = acf(m, 0.0)
    for t, want in P2_TABLE.items():
        assert abs(acf(m, t) - want) < 5e-9 * max(1.0, g0)


def test_two_rates_second_parameter_set():
    m = FouModel.from_rates([0.7, 3.1], sigma=1.4, hurst=0.62)
    for t, want in P2B_TABLE.items():
        assert abs(acf(m, t) - want) < 5e-9


def test_three_rates_frozen():
    m = FouModel.from_rates([1.0, 2.0, 3.0], sigma=1.0, hurst=0.8)
    for t, want in P3_TABLE.items():
        assert abs(acf(m, t) - want) < 5e-9


def test_repeated_rate_frozen():
    m = FouModel.from_rates([1.0], [2], sigma=1.0, hurst=0.75)
    for t, want in REP2_TABLE.items():
        assert abs(acf(m, t) - want) < 5e-9


def test_repeated_rate_multiplicity_three_frozen():
    m = FouModel.from_rates([1.3], [3], sigma=1.0, hurst=0.68)
    for t, want in REP3_TABLE.items():
        assert abs(acf(m, t) - want) < 5e-9


def test_cross_covariance_frozen():
    for (l1, l2, t), want in CROSS_TABLE.items():
        assert cross_cov(l1, l2, 1.0, 0.75, t) == pytest.approx(want, abs=5e-10)


def test_cross_covariance_swap_symmetry():
    # E[X_a(t) X_b(0)] = E[X_b(-t) X_a(0)]
    a = cross_cov(1.0, 2.0, 1.0, 0.75, 0.7)
    b = cross_cov(2.0, 1.0, 1.0, 0.75, -0.7)
    assert b == pytest.approx(a, rel=1e-13)


def test_cross_covariance_markov_case():
    # H=1/2 collapses to sigma^2 e^{-l2 t} / (l1 + l2) for t >= 0
    for t in (0.0, 0.4, 2.0):
        got = cross_cov(1.0, 2.0, 1.0, 0.5, t)
        assert got == pytest.approx(np.exp(-2.0 * t) / 3.0, rel=1e-9)


# --------------------------------------------------------------------------
# partial-fraction weights

def test_k_weights_frozen():
    np.testing.assert_allclose(k_coefficients((1.0, 2.0)), [-1.0, 2.0], rtol=1e-14)
    np.testing.assert_allclose(k_coefficients((1.0, 2.0, 3.0)), [0.5, -4.0, 4.5],
                               rtol=1e-13)


@given(st.lists(st.floats(min_value=0.05, max_value=50.0), min_size=2, max_size=5,
                unique=True))
def test_k_weights_sum_to_one(lams):
    lams = np.sort(lams)
    if np.min(np.diff(lams) / lams[1:]) < 1e-3:
        return  # too close to a repeated rate for the distinct formula
    assert float(np.sum(k_coefficients(lams))) == pytest.approx(1.0, abs=1e-9)


def test_lemma_identities_random_sets():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(2, 5))
        lams = np.sort(10.0 ** rng.uniform(-1, 1, size=n))
        while np.min(np.diff(lams) / lams[1:]) < 1e-2:
            lams = np.sort(10.0 ** rng.uniform(-1, 1, size=n))
        lhs, rhs = partial_fraction_check(lams, "lemma1", i=int(rng.integers(1, n + 1)))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
        x = float(rng.uniform(0.1, 5.0))
        lhs, rhs = partial_fraction_check(lams, "lemma2", x=x)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
        lhs, rhs = partial_fraction_check(lams, "lemma3", x=x)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_lemma2_frozen_point():
    lhs, rhs = partial_fraction_check((2.0, 5.0), "lemma2", x=3.0)
    assert lhs == pytest.approx(-0.1125, rel=1e-13)
    assert rhs == pytest.approx(-0.1125, rel=1e-13)


# --------------------------------------------------------------------------
# backends

def test_backend_equivalence_distinct():
    m = FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.75)
    closed = AcfEvaluator(m, backend=Backend.CLOSED_FORM_DISTINCT)
    spectral = AcfEvaluator(m, backend=Backend.SPECTRAL_INVERSION)
    g0 = closed(0.0)
    for t in (0.0, 0.1, 1.0, 5.0, 20.0):
        assert abs(closed(t) - spectral(t)) < 1e-9 * g0


def test_auto_backend_selection():
    distinct = FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.7)
    repeated = FouModel.from_rates([1.0], [2], sigma=1.0, hurst=0.7)
    assert AcfEvaluator(distinct).backend is Backend.CLOSED_FORM_DISTINCT
    assert AcfEvaluator(repeated).backend is Backend.SPECTRAL_INVERSION


def test_explicit_closed_backend_rejects_near_equal_rates():
    m = FouModel.from_rates([1.0, 1.0 + 1e-5], sigma=1.0, hurst=0.7)
    with pytest.raises(DegenerateLambdas):
        AcfEvaluator(m, backend=Backend.CLOSED_FORM_DISTINCT)


def test_near_equal_rates_approach_repeated_value():
    m = FouModel.from_rates([1.0, 1.0 + 1e-5], sigma=1.0, hurst=0.75)
    assert acf(m, 0.0) == pytest.approx(REP2_TABLE[0.0], rel=1e-3)


def test_k_weights_reject_near_equal_rates():
    with pytest.raises(DegenerateLambdas):
        k_coefficients((1.0, 1.0 + 1e-6))


def test_evaluator_grid_matches_pointwise():
    m = FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.7)
    ev = AcfEvaluator(m)
    ts = np.array([0.0, 0.25, 1.0, 3.0])
    # vectorized evaluation may reassociate sums; allow last-bits slack
    np.testing.assert_allclose(ev.grid(ts), [ev(t) for t in ts],
                               rtol=1e-12, atol=1e-15)


def test_evaluator_even_in_t():
    m = FouModel.from_rates([0.8, 2.2], sigma=1.3, hurst=0.66)
    ev = AcfEvaluator(m)
    for t in (0.3, 1.7):
        assert ev(-t) == ev(t)


@given(st.floats(min_value=0.0, max_value=10.0))
@settings(max_examples=20)
def test_variance_dominates(t):
    m = FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.75)
    assert abs(acf(m, t)) <= acf(m, 0.0) * (1 + 1e-12)


# --------------------------------------------------------------------------
# spectral density and memory

def test_density_even_and_nonnegative():
    m = FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.75)
    d = SpectralDensity(m)
    xs = np.linspace(0.01, 20, 50)
    vals = d(xs)
    assert np.all(vals >= 0)
    np.testing.assert_allclose(d(-xs), vals, rtol=1e-15)


def test_density_zero_frequency_branches():
    long_mem = SpectralDensity(FouModel.from_rates([1.0], sigma=1.0, hurst=0.75))
    assert long_mem.singular_at_zero
    assert np.isinf(long_mem(0.0))
    short_p2 = SpectralDensity(FouModel.from_rates([1.0, 2.0], sigma=1.0, hurst=0.75))
    assert not short_p2.singular_at_zero
    assert short_p2(0.0) == 0.0
    # p=1 at H=1/2: flat numerator, finite positive value at zero
    markov = SpectralDensity(FouModel.from_rates([1.0], sigma=1.0, hurst=0.5))
    assert not markov.singular_at_zero
    assert np.isfinite(markov(0.0)) and markov(0.0) > 0


def test_density_closed_formula():
    # independent re-evaluation of the stated form
    m = FouModel.from_rates([1.0, 2.0], sigma=1.3, hurst=0.7)
    d = SpectralDensity(m)
    for x in (0.3, 1.0, 4.0):
        want = (1.3 ** 2 * Gamma(2 * 0.7 + 1) * np.sin(0.7 * np.pi)
                * abs(x) ** (2 * 2 - 1 - 2 * 0.7)
                / (2 * np.pi * (1 + x ** 2) * (4 + x ** 2)))
        assert float(d(x)) == pytest.approx(want, rel=1e-12)


def test_memory_dichotomy():
    assert memory_class(FouModel.from_rates([1.0], sigma=1, hurst=0.75)) \
        is MemoryClass.LONG_MEMORY
    assert memory_class(FouModel.from_rates([1.0], sigma=1, hurst=0.5)) \
        is MemoryClass.SHORT_MEMORY
    assert memory_class(FouModel.from_rates([1.0, 2.0], sigma=1, hurst=0.75)) \
        is MemoryClass.SHORT_MEMORY
    assert memory_class(FouModel.from_rates([1.0], [2], sigma=1, hurst=0.9)) \
        is MemoryClass.SHORT_MEMORY


def test_limit_toward_single_rate():
    # FOU(1, eps) approaches FOU(1) as eps -> 0; the gap at eps=1e-3 already
    # sits below 1% of the variance for moderate H, and shrinks with eps
    base = FouModel.from_rates([1.0], sigma=1.0, hurst=0.6)
    ts = np.linspace(0.0, 5.0, 26)
    g1 = AcfEvaluator(base).grid(ts)
    sups = []
    for eps in (1e-2, 1e-3):
        m = FouModel.from_rates([1.0, eps], sigma=1.0, hurst=0.6)
        g2 = AcfEvaluator(m).grid(ts)
        sups.append(np.max(np.abs(g2 - g1)) / g1[0])
    assert sups[1] < 0.01
    assert sups[1] < sups[0]


# --------------------------------------------------------------------------
# model construction

def test_model_structure_accessors():
    m = FouModel.from_rates([2.0, 1.0], [1, 2], sigma=1.0, hurst=0.7)
    assert m.p == 3
    assert not m.all_distinct
    assert sorted(m.expanded_rates()) == [1.0, 1.0, 2.0]
    d = FouModel.from_rates([3.0, 1.0], sigma=1.0, hurst=0.7)
    assert d.all_distinct and d.p == 2


def test_model_rejects_bad_inputs():
    with pytest.raises(ValueError):
        FouModel.from_rates([-1.0], sigma=1.0, hurst=0.7)
    with pytest.raises(ValueError):
        FouModel.from_rates([1.0], sigma=0.0, hurst=0.7)
    with pytest.raises(ValueError):
        FouModel.from_rates([1.0], sigma=1.0, hurst=0.3)
    with pytest.raises(ValueError):
        FouModel.from_rates([1.0], [0], sigma=1.0, hurst=0.7)
    with pytest.raises(ValueError):
        FouModel.from_rates([1.0, 2.0], [1], sigma=1.0, hurst=0.7)
