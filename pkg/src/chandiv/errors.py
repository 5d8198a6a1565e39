"""Exception hierarchy shared by all chandiv modules."""


class ChannelError(Exception):
    """Base class for every error raised by chandiv."""


class InvalidInput(ChannelError, ValueError):
    """Non-finite or otherwise malformed numerical input."""


class DimensionMismatch(ChannelError, ValueError):
    pass


class WrongDimension(DimensionMismatch):
    pass


class NotHermitian(ChannelError, ValueError):
    pass


class NotTracePreserving(ChannelError, ValueError):
    pass


class NotPSD(ChannelError, ValueError):
    pass


class NegativeChoi(ChannelError, ValueError):
    """Kraus operators were requested for a map that is not completely positive."""


class SingularNormalization(ChannelError, ValueError):
    pass


class InvalidGenerator(ChannelError, ValueError):
    pass


class OutOfRange(ChannelError, ValueError):
    pass


class NonPositiveLambda(OutOfRange):
    pass


class WrongRank(ChannelError, ValueError):
    pass


class DegenerateClass(ChannelError, ValueError):
    pass


class NotInfinitesimalDivisible(ChannelError, ValueError):
    pass


class UnknownSuite(ChannelError, KeyError):
    pass


class NumericalFailure(ChannelError, ArithmeticError):
    pass


class NonConvergence(NumericalFailure):
    """An iteration hit its cap; ``diagnostics`` carries the last state."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ParseError(ChannelError, ValueError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ChannelError, ValueError):
    pass
