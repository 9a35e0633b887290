"""Exception types shared across the package."""


class DosQuantError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(DosQuantError, ValueError):
    """Matrix shapes do not conform."""


class InvalidLevelError(DosQuantError, ValueError):
    """Quantization level is even, too small, or below a required floor."""


class SaturationError(DosQuantError):
    """A state fell outside the quantizer range it was supposed to lie in."""

    def __init__(self, message, k=None, excess=None):
        super().__init__(message)
        self.k = k
        self.excess = excess


class ProtocolError(DosQuantError):
    """Encoder/decoder message handling went wrong (bad index, missing side info)."""


class UnreachableStateError(DosQuantError):
    """A flag combination appeared that the case machine does not allow."""


class InfeasibleError(DosQuantError):
    """Parameters admit no valid trace, signal or certificate."""

    def __init__(self, message, binding=None):
        super().__init__(message)
        self.binding = binding


class ScenarioError(DosQuantError, ValueError):
    """A scenario document failed validation."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
