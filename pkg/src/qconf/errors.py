"""Exception hierarchy shared across the package."""


class QConfError(Exception):
    """Base class for all errors raised by qconf."""


class InvalidOperandError(QConfError, ValueError):
    """An operation received arguments outside its domain."""


class BasisDegeneracyError(QConfError):
    """Two generated basis states are not orthogonal."""

    def __init__(self, message, labels=()):
        super().__init__(message)
        self.labels = tuple(labels)


class SpanError(QConfError):
    """A state has weight outside the span of the measurement basis."""


class CodebookError(QConfError, ValueError):
    """A codebook descriptor violates a structural or orthogonality requirement."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IntegrityError(QConfError):
    """An announcement is inconsistent with every admissible message tuple."""


class ConfigError(QConfError, ValueError):
    """A run configuration is malformed."""
