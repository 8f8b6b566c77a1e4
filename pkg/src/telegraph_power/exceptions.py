"""Exception types shared across the package."""


class TelegraphError(Exception):
    """Base class for all package errors."""


class ParameterError(TelegraphError, ValueError):
    """A parameter is outside its admissible range.

    The offending field name is available as ``field``.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class InfeasibleError(TelegraphError, ValueError):
    """A requested (family, cv, mean) target cannot be realized."""


class UsageError(TelegraphError, ValueError):
    """An operation was called with inputs it cannot work with."""


class OutOfRangeError(UsageError):
    """A time lies beyond the generated switching horizon."""


class ConfigurationError(TelegraphError, ValueError):
    """An integrator configuration violates its invariants."""


class HorizonError(OutOfRangeError):
    """A switch sequence ends before the simulation horizon."""
