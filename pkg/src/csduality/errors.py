"""Exception types raised across the package."""


class CSDualityError(Exception):
    """Base class for all library errors."""


class IndexOutOfRange(CSDualityError, IndexError):
    pass


class NonPositiveTerm(CSDualityError, ValueError):
    pass


class OutOfDomain(CSDualityError, ValueError):
    pass


class OutOfRange(CSDualityError, ValueError):
    pass


class NegativeParameter(OutOfRange):
    pass


class Singular(CSDualityError, ZeroDivisionError):
    pass


class InvalidInterval(CSDualityError, ValueError):
    pass


class TailNotConverged(CSDualityError, ArithmeticError):
    pass


class DivergentIntegral(CSDualityError, ArithmeticError):
    pass


class DivergentNormalizer(DivergentIntegral):
    pass


class ZeroEvidence(CSDualityError, ArithmeticError):
    pass


class CertificateFailed(CSDualityError, ValueError):
    pass


class DimensionMismatch(CSDualityError, ValueError):
    pass


class SizeLimit(CSDualityError, MemoryError):
    pass


class ParseError(CSDualityError, ValueError):
    """Malformed input document; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownFamily(CSDualityError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown family"
