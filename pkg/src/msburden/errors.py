"""Exception hierarchy for msburden."""


class MsburdenError(Exception):
    """Base class for all package errors."""


class ValidationError(MsburdenError, ValueError):
    """A subject record violates the progressive-process structure.

    Attributes
    ----------
    rule : str
        Name of the violated rule (the subclass name).
    subject_id : object
        Identifier of the offending record, when known.
    """

    def __init__(self, message, subject_id=None):
        self.subject_id = subject_id
        self.detail = message
        self.rule = type(self).__name__
        prefix = f"subject {subject_id!r}: " if subject_id is not None else ""
        super().__init__(f"{prefix}{self.rule}: {message}")


class MonotonicityViolation(ValidationError):
    pass


class IndicatorViolation(ValidationError):
    pass


class CensorMismatch(ValidationError):
    pass


class NegativeTime(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class DeathExcluded(MsburdenError, ValueError):
    pass


class EmptySample(MsburdenError, ValueError):
    pass


class NonPositiveHorizon(MsburdenError, ValueError):
    pass


class DegenerateVariance(MsburdenError, ArithmeticError):
    pass


class ZeroControlBurden(MsburdenError, ArithmeticError):
    pass


class CensoredInput(MsburdenError, ValueError):
    pass


class NonMonotoneScores(MsburdenError, ValueError):
    pass


class NoEvents(MsburdenError, ValueError):
    pass


class MonotoneLikelihood(MsburdenError, ArithmeticError):
    pass


class InvalidScenario(MsburdenError, ValueError):
    pass


class ParseError(MsburdenError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class HeaderMismatch(MsburdenError, ValueError):
    pass


class ConfigError(MsburdenError, ValueError):
    pass
