"""Exception hierarchy shared by the solver modules."""


class TCError(Exception):
    """Base class for all errors raised by tcollapse."""


class InputDomainError(TCError, ValueError):
    """Non-finite or otherwise inadmissible evaluator input."""


class UnknownFluxError(TCError, KeyError):
    pass


class RangeError(TCError, ValueError):
    """A value lies outside the lambda-grid range."""


class RegionExitError(TCError):
    """A characteristic left the region where the flux is defined."""

    def __init__(self, message, exit_time):
        super().__init__(message)
        self.exit_time = exit_time


class SupportOverflowError(TCError):
    """Compactly supported data would be transported across a domain edge."""


class ConfigurationError(TCError, ValueError):
    pass


class UnsupportedFluxError(TCError):
    pass
