"""Exception types raised by the attitude estimation routines."""


class AttitudeError(Exception):
    """Base class for all errors raised by :mod:`attinit`."""


class InvalidInputError(AttitudeError, ValueError):
    """Non-finite, non-unit or otherwise malformed input."""


class InsufficientObservationsError(AttitudeError):
    """Fewer vector observations than needed for a unique attitude."""


class DegenerateGeometryError(AttitudeError):
    """Observation set is (numerically) collinear; attitude is not unique."""


class NotReadyError(AttitudeError):
    """The constant attitude has not been solved yet."""


class SingularUpdateError(AttitudeError):
    """Innovation covariance too ill-conditioned to invert."""


class ConfigError(AttitudeError, ValueError):
    """Invalid experiment or scenario configuration."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
