"""Exception types. All are ``ValueError`` subclasses so callers can catch broadly."""


class NonGaussError(ValueError):
    """Base class for every validation failure raised by this package."""


class InvalidParameterError(NonGaussError):
    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message)


class OutOfRangeError(NonGaussError):
    pass


class NoRootError(NonGaussError):
    pass


class NotNormalizedError(NonGaussError):
    pass


class EmptyRunError(NonGaussError):
    pass


class NoClicksError(NonGaussError):
    pass


class SingularSplittingError(NonGaussError):
    pass


class DegenerateError(NonGaussError):
    pass


class ZeroMeanError(NonGaussError):
    pass


class TruncationOverflowError(NonGaussError):
    pass


class ConsistencyError(NonGaussError):
    """Two independent evaluation routes disagreed beyond tolerance."""


class ParseError(NonGaussError):
    def __init__(self, row, column, reason):
        self.row, self.column, self.reason = row, column, reason
        super().__init__(f"row {row}, column {column!r}: {reason}")


class InvariantViolationError(NonGaussError):
    def __init__(self, row, reason):
        self.row, self.reason = row, reason
        super().__init__(f"row {row}: {reason}")


class ConfigError(NonGaussError):
    def __init__(self, field_path, reason):
        self.field_path, self.reason = field_path, reason
        super().__init__(f"{field_path}: {reason}")


class AnalysisError(NonGaussError):
    def __init__(self, label, cause):
        self.label, self.cause = label, cause
        super().__init__(f"{label}: {cause}")
