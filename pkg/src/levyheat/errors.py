"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` used by the CLI when it
maps failures to exit codes and the JSON error record on stderr.
"""


class LevyHeatError(Exception):
    code = "error"


class InvalidInputError(LevyHeatError, ValueError):
    code = "invalid_input"


class OutOfRangeError(InvalidInputError):
    """Requested value lies outside the attainable range of a function."""

    code = "out_of_range"

    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class PreconditionError(InvalidInputError):
    code = "precondition"


class RegimeError(PreconditionError):
    """Closed-form asymptotic bound evaluated outside its regime."""

    code = "regime"


class FeatureUnavailableError(LevyHeatError):
    code = "feature_unavailable"


class NumericError(LevyHeatError, ArithmeticError):
    code = "numeric"

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class DivergenceError(NumericError):
    code = "divergence"


class NoDensityError(NumericError):
    """exp(-t psi) is not integrable, so no transition density is available."""

    code = "no_density"


class AccuracyWarning(UserWarning):
    """A numerical result was returned but a resolution diagnostic failed."""


class RegimeWarning(UserWarning):
    """Parameters approach the edge of an asymptotic formula's regime."""
