"""Fractional iterated Ornstein-Uhlenbeck processes: autocovariances,
spectral densities, exact and constructive simulation, estimation,
prediction, and baseline comparisons."""

from .specfun import Hurst, SpecfunConfig, f_h, f_h1, f_h2, mixed_decay
from .foucore import (
    AcfEvaluator,
    Backend,
    FouModel,
    MemoryClass,
    SpectralDensity,
    acf,
    cross_cov,
    k_coefficients,
    memory_class,
    partial_fraction_check,
)
from .errors import (
    DataFormatError,
    DegenerateDenominator,
    DegenerateLambdas,
    DegenerateSeries,
    EmbeddingNotPSD,
    FactorizationFailure,
    FouError,
    SingularCovariance,
)
from .sampler import (
    FbmPath,
    SampleMethod,
    SamplePath,
    apply_ou_operator,
    compose_ou_operators,
    default_burn_in,
    sample_exact,
    sample_fbm,
    simulate_operator,
)
from .estimator import (
    FitConfig,
    FitResult,
    ParamBounds,
    Preprocessing,
    SeriesSample,
    empirical_acf,
    fit,
    fit_to_acf,
    preprocess,
    to_original_units,
)
from .predictor import ForecastResult, one_step_conditional_variance, one_step_predictions
from .baselines import ArmaModel, aic, arma_one_step, fit_ar_yule_walker, fit_arma_css
from .metrics import (
    EvalReport,
    WillmottVariant,
    mae,
    rmse,
    rolling_curves,
    willmott_d,
    willmott_d1,
)
from .datasets import load_lake_huron, load_series_a, synthetic_oxygen

__version__ = "0.1.0"
