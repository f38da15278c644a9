"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`ICostError`.
Input and configuration problems are :class:`ValidationError` subclasses (the
CLI maps them to exit code 2); numerical failures during fitting are
:class:`TrainingError` subclasses (exit code 1).
"""


class ICostError(Exception):
    """Base class for all package errors."""


class ValidationError(ICostError, ValueError):
    """Bad input data, bad configuration, or a violated precondition."""


class TrainingError(ICostError, RuntimeError):
    """A learner failed to produce a finite model."""


# dataset
class DatasetNotFound(ValidationError, FileNotFoundError):
    pass


class MalformedCsv(ValidationError):
    pass


class TooManyMissing(ValidationError):
    pass


class SingleClass(ValidationError):
    pass


class AmbiguousPositive(ValidationError):
    pass


class ClassTooSmall(ValidationError):
    pass


class EmptyRowSet(ValidationError):
    pass


# complexity
class TooFewInstances(ValidationError):
    pass


class NotBinary(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


# costing
class BadArity(ValidationError):
    pass


class NonPositiveCost(ValidationError):
    pass


class OrderViolation(ValidationError):
    pass


class ProfileMismatch(ValidationError):
    pass


# learners
class DegenerateLabels(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonFinite(TrainingError):
    pass


# multiclass / metrics / harness
class TooFewClasses(ValidationError):
    pass


class EmptyFold(ValidationError):
    pass


class BadParams(ValidationError):
    pass
