"""Exception hierarchy.

ConfigError covers validation of user-supplied configuration and files
(CLI exit code 2). SimulationError and its subclasses cover failures of a
simulation that started from a valid configuration (CLI exit code 1).
"""


class ConfigError(ValueError):
    """Invalid configuration value, flag combination or input file."""


class VolumeFormatError(ConfigError):
    """Malformed or missing volume / sidecar / transform file."""


class SimulationError(RuntimeError):
    """Base class for model-level failures."""


class DimensionMismatchError(SimulationError):
    """Paired vectors have different lengths."""


class DomainError(SimulationError):
    """Non-finite or otherwise meaningless numeric input."""


class InputRangeError(SimulationError):
    """Input sample outside the cell's differential full scale."""

    def __init__(self, message: str, sample_index: int | None = None):
        super().__init__(message)
        self.sample_index = sample_index


class GranularityError(SimulationError):
    """Weight magnitude is not an integer multiple of the time LSB."""


class ModelValidityError(SimulationError):
    """Operating point outside the model's validity (e.g. frequency <= 0)."""


class CounterOverflowError(SimulationError):
    """Cycle counter exceeded its configured width."""


class CalibrationError(SimulationError):
    """Nonlinearity calibration cannot reach the requested target."""


class SingularTransformError(SimulationError):
    """Transform matrix is not invertible."""
