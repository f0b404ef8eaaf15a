"""Error handling and custom exceptions."""

from typing import Any


class AtvrError(Exception):
    """Base exception for library errors."""

    def __init__(
        self,
        message: str,
        error_code: str = "ATVR_ERROR",
        details: dict[str, Any] | None = None,
    ):
        """
        Initialize error.

        Args:
            message: Error message
            error_code: Stable, machine-readable error code
            details: Additional error details (shapes, seeds, epochs, ...)
        """
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary (used in reports)."""
        return {
            "error": type(self).__name__,
            "error_code": self.error_code,
            "message": self.message,
            "details": self.details,
        }


class InvalidInputError(AtvrError):
    """Dimension mismatch, non-finite entries or out-of-range arguments."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, error_code="INVALID_INPUT", details=details)


class InvalidDistanceError(InvalidInputError):
    """A distance oracle returned a negative or non-finite value."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, details=details)
        self.error_code = "INVALID_DISTANCE"


class NumericError(AtvrError):
    """Non-finite loss, objective or function evaluation."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, error_code="NUMERIC_ERROR", details=details)


class TrainingDivergedError(NumericError):
    """Training objective became non-finite."""

    def __init__(self, epoch: int, batch: int, objective: float):
        super().__init__(
            f"Non-finite training objective at epoch {epoch}, batch {batch}",
            details={"epoch": epoch, "batch": batch, "objective": objective},
        )
        self.error_code = "TRAINING_DIVERGED"


class UnsupportedModelError(AtvrError):
    """Operation is not defined for this model kind."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, error_code="UNSUPPORTED_MODEL", details=details)


class CapacityError(AtvrError):
    """Exact computation exceeds the supported problem size."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, error_code="CAPACITY_EXCEEDED", details=details)


class DegenerateInputError(AtvrError):
    """No usable data left after filtering."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, error_code="DEGENERATE_INPUT", details=details)


class SchemaError(AtvrError):
    """A persisted artifact (checkpoint, dataset) fails validation."""

    def __init__(self, path: str, message: str):
        super().__init__(
            f"Invalid file '{path}': {message}",
            error_code="SCHEMA_ERROR",
            details={"path": path},
        )


class ConfigError(AtvrError):
    """Run configuration failed validation."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message, error_code="CONFIG_ERROR", details=details)
