"""Exception types raised by the simulator."""


class SpecordError(Exception):
    """Base class for all simulator errors."""


class InvalidCorrelationError(SpecordError, ValueError):
    pass


class UndefinedCorrelationError(SpecordError, ValueError):
    pass


class InvalidProfileError(SpecordError, ValueError):
    pass


class IllConditionedConstraintsError(SpecordError, ValueError):
    pass


class FactorizationError(SpecordError, ValueError):
    pass


class DimensionError(SpecordError, ValueError):
    pass


class ConfigError(SpecordError, ValueError):
    """Scenario file could not be parsed or validated.

    ``field`` names the offending key when the problem is a validation
    failure rather than a syntax error.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
