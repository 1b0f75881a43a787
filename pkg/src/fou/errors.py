"""Exception types shared across the package."""


class FouError(Exception):
    """Base class for all package-specific errors."""


class DegenerateLambdas(FouError):
    """Raised when a formula requiring pairwise-distinct rates is handed a
    lambda set whose minimum relative gap is below the distinctness guard.
    """


class EmbeddingNotPSD(FouError):
    """Circulant embedding produced a negative eigenvalue; caller should fall
    back to a dense factorization."""


class FactorizationFailure(FouError):
    """Covariance factorization failed even at the jitter ceiling. Usually
    indicates a non-PSD autocovariance evaluation bug upstream."""


class SingularCovariance(FouError):
    """Prediction covariance system could not be solved at the jitter ceiling."""


class DegenerateSeries(FouError):
    """The input series has no usable variation (zero variance)."""


class DegenerateDenominator(FouError):
    """A Willmott index denominator vanished while the numerator did not."""


class DataFormatError(FouError):
    """Malformed input data (CSV parse failures and the like)."""
