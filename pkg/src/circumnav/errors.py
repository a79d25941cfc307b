"""Exception types shared across the simulation stack."""


class CircumnavError(Exception):
    """Base class for all library errors."""


class InvalidStateError(CircumnavError):
    """A world state contains non-finite or otherwise unusable values."""


class InvalidControlError(CircumnavError):
    """A control input is non-finite."""


class InvalidMeasurementError(CircumnavError):
    """A sensor value violates its physical domain (e.g. negative range)."""


class InvalidDepthError(CircumnavError):
    """A camera back-projection was requested with non-positive depth."""


class NumericalFailureError(CircumnavError):
    """A filter update could not be computed (singular innovation)."""


class ControllerInputError(CircumnavError):
    """The controller is missing a required estimate."""


class ConfigError(CircumnavError):
    """A scenario configuration is invalid.

    ``field`` holds the dotted path of the offending entry, e.g.
    ``"world.dt"``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class SchemaError(CircumnavError):
    """A log file does not match the documented CSV schema.

    ``column`` names the missing or malformed column.
    """

    def __init__(self, column: str, message: str = ""):
        self.column = column
        super().__init__(message or f"missing column: {column}")


class EmptyWindowError(CircumnavError):
    """A metrics window selected no samples."""


class ScenarioEndSignal(CircumnavError):
    """Raised when no agents remain alive."""
