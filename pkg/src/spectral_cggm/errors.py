"""Exception and warning classes raised across the package."""


class CggmError(Exception):
    """Base class for every error raised by spectral_cggm."""


class NotPositiveDefinite(CggmError, ValueError):
    pass


class SingularInput(NotPositiveDefinite):
    """Unpenalized problem on a singular covariance has no finite solution."""


class DimensionMismatch(CggmError, ValueError):
    pass


class TooFewSamples(CggmError, ValueError):
    pass


class NonFiniteInput(CggmError, ValueError):
    pass


class OutOfRange(CggmError, ValueError):
    pass


class TooShort(CggmError, ValueError):
    pass


class EmptyPanel(CggmError, ValueError):
    pass


class EmptyBand(CggmError, ValueError):
    pass


class BadDelta(CggmError, ValueError):
    """Eigenvalue floor too large for the problem to be feasible."""


class DegenerateData(CggmError, ValueError):
    pass


class EmptyGrid(CggmError, ValueError):
    pass


class ParseError(CggmError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonFiniteSample(ParseError):
    pass


class InconsistentTrialLength(ParseError):
    pass


class StageError(CggmError):
    """Wraps an error raised inside one stage of the pipeline."""

    def __init__(self, stage, error):
        super().__init__(f"[{stage}] {type(error).__name__}: {error}")
        self.stage = stage
        self.error = error


class MaxIterationsExceeded(RuntimeWarning):
    """Solver stopped at its iteration cap; the best iterate is returned."""
