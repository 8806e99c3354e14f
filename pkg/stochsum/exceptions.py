class StochSumError(Exception):
    """Base class for every error raised by stochsum.

    ``exit_code`` is the status the management commands exit with.
    """

    exit_code = 1


class ConfigError(StochSumError, ValueError):
    exit_code = 2


class MalformedRowError(ConfigError):
    pass


class UncertifiableTailError(ConfigError):
    """A row's l1 tail cannot be bounded by the requested precision."""


class GuardRangeError(StochSumError, ValueError):
    exit_code = 3


class InsufficientSequenceError(GuardRangeError):
    pass


class PieceCapExceeded(StochSumError):
    """A common refinement would need more pieces than the configured cap."""

    exit_code = 4

    def __init__(self, pieces, cap):
        self.pieces = pieces
        self.cap = cap
        super().__init__(
            f"common refinement needs {pieces} pieces, cap is {cap}; reduce the depth"
        )


class UnsupportedOperation(StochSumError, TypeError):
    pass
