"""Exception hierarchy shared across the package."""


class WafError(Exception):
    """Base class for all errors raised by wafassoc."""


class DomainError(WafError, ValueError):
    """An argument lies outside the domain of a numerical routine."""


class ValidationError(WafError, ValueError):
    """Input data violate a documented invariant."""


class ParseError(ValidationError):
    """A text input file could not be parsed.

    ``line`` is the 1-based line number of the offending row, when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DimensionError(ValidationError):
    """Array shapes do not agree."""


class FitError(WafError):
    """The null model could not be fitted."""


class RankDeficiencyError(FitError):
    """The covariate design matrix (with intercept) is singular."""


class SeparationError(FitError):
    """Logistic regression hit perfect or quasi-perfect separation."""


class DegenerateInputError(WafError):
    """Data carry no variation to test (e.g. constant residuals)."""
