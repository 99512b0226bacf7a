"""Exception types shared across the package."""


class NussbaumSimError(Exception):
    """Base class for all package errors."""


class SegmentHorizonError(NussbaumSimError):
    """The requested argument lies beyond the representable segment range.

    Raised instead of silently returning an infinite or saturated value:
    a corrupted gain would silently poison every downstream trace.
    """


class GainOverflowError(NussbaumSimError):
    """Exponential gain evaluation exceeded the configured exponent cap."""


class ChainOverflowError(NussbaumSimError):
    """Parameter recurrence overflowed while deriving an agent's constants."""

    def __init__(self, agent_index: int, message: str):
        super().__init__(message)
        self.agent_index = agent_index


class ConfigError(NussbaumSimError):
    """Invalid scenario configuration; carries the offending field path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class NonFiniteDerivativeError(NussbaumSimError):
    """A state derivative evaluated to NaN or infinity."""
