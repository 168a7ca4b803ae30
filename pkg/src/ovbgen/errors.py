"""Exception hierarchy for the package.

Two branches matter to callers: ``ValidationError`` covers malformed inputs
and contract violations (CLI exit code 2), ``NumericError`` covers failures
of the numerical machinery on well-formed inputs (CLI exit code 3).
"""


class OvbError(Exception):
    """Base class for all package errors."""


class ValidationError(OvbError):
    """Input or contract violation; maps to CLI exit code 2."""


class NumericError(OvbError):
    """Numerical failure on well-formed input; maps to CLI exit code 3."""


# -- input validation ---------------------------------------------------


class MissingColumn(ValidationError):
    """A required column is absent from a table."""


class NonBinaryTreatment(ValidationError):
    """Treatment column contains values outside {0, 1}."""


class EmptyArm(ValidationError):
    """A treatment arm has no rows."""


class NonFiniteValue(ValidationError):
    """A column contains a non-finite or unparseable value."""


class SchemaMismatch(ValidationError):
    """Trial and target covariate schemas disagree."""


class TooFewRows(ValidationError):
    """Not enough rows to fit the required regressions."""


class SingleClass(ValidationError):
    """Binary-response fit requested but only one class is present."""


class SingleCovariate(ValidationError):
    """Benchmarking needs at least two covariates."""


class InvalidR2(ValidationError):
    """An R-squared argument is outside its valid range."""


class InvalidInput(ValidationError):
    """A scalar argument violates its stated precondition."""


class InvalidConfig(ValidationError):
    """A simulation configuration violates its invariants."""


# -- numerical failures -------------------------------------------------


class RankDeficient(NumericError):
    """Design matrix is numerically rank deficient."""


class DegenerateWeights(NumericError):
    """All weight mass in a treatment arm is zero."""


class ResampleFailure(NumericError):
    """Too many bootstrap resamples failed to produce an estimate."""
