"""Exception types raised by inlslab."""


class InlsError(Exception):
    """Base class for all inlslab errors."""


class ParameterError(InlsError, ValueError):
    """Physical or numerical parameters outside their admissible range."""


class GridError(InlsError, ValueError):
    pass


class ZeroState(InlsError, ValueError):
    pass


class DomainTooSmall(InlsError, ValueError):
    pass


class InvalidFrequency(ParameterError):
    pass


class NonpositiveP(InlsError, ValueError):
    pass


class NoZeroCrossing(InlsError, ValueError):
    pass


class NotConverged(InlsError, RuntimeError):
    pass


class TailBelowFloor(InlsError, ValueError):
    pass


class NonFinite(InlsError, FloatingPointError):
    pass


class ParamsMismatch(InlsError, ValueError):
    pass


class ConfigError(InlsError, ValueError):
    """Configuration file problem; ``line`` is 1-based when known."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"[{key}] "
        super().__init__(prefix + message)
