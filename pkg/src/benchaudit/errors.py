"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (CLI exit code 2),
numerical breakdowns from :class:`NumericalError` (exit code 3).
"""


class BenchAuditError(Exception):
    pass


class ValidationError(BenchAuditError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class NumericalError(BenchAuditError, ArithmeticError):
    pass


# results ingestion
class MissingColumn(ValidationError):
    pass


class DuplicateKey(ValidationError):
    pass


class NonNumericValue(ValidationError):
    pass


class NegativeError(ValidationError):
    pass


class EmptyCube(ValidationError):
    pass


class UnknownEfficiencyKind(ValidationError):
    pass


class NonPositiveValue(ValidationError):
    pass


# aggregation / ranking
class MetricAbsent(ValidationError):
    pass


class MissingCell(ValidationError):
    pass


class IncompleteTable(ValidationError):
    pass


# statistical tests
class DegenerateShape(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


# efficiency
class NonPositiveInput(ValidationError):
    pass


class MissingEfficiencyKind(ValidationError):
    pass


class MissingModel(ValidationError):
    pass


# series features
class TooShort(ValidationError):
    pass


class MissingValues(ValidationError):
    pass


class AllChannelsConstant(ValidationError):
    pass


class SingularDesign(NumericalError):
    pass


# reporting
class TooFewAxes(ValidationError):
    pass
