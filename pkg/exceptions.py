"""Error hierarchy shared by every layer, with the CLI exit code of each family."""

from typing import Any, Optional

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class FluvganError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_CONFIG


class ConfigurationError(FluvganError, ValueError):
    """Invalid shapes, schedules, presets, or settings."""


class DegenerateBatchError(ConfigurationError):
    """Batch statistics requested on a single item."""


class ContractError(FluvganError, ValueError):
    """An operation was called outside its contract (e.g. non-scalar loss)."""


class DoubleBackwardError(ConfigurationError):
    """A recorded operation cannot be differentiated twice."""

    def __init__(self, layer: str) -> None:
        super().__init__(f"double backward is not available for '{layer}'")
        self.layer = layer


class DataError(FluvganError, ValueError):
    """Input data violates a precondition of the preprocessing pipeline."""

    exit_code = EXIT_DATA


class FormatError(DataError):
    """A binary container could not be decoded."""


class BadMagicError(FormatError):
    """The file does not start with the expected magic bytes."""


class UnsupportedVersionError(FormatError):
    """The container version is not supported by this reader."""


class TruncatedPayloadError(FormatError):
    """The file ends before the declared payload is complete."""


class PayloadSizeError(FormatError):
    """The payload is longer than the header declares."""


class NonFiniteGradientError(FluvganError, ArithmeticError):
    """An optimizer step was rejected because a gradient is NaN or infinite."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, parameter: str) -> None:
        super().__init__(f"non-finite gradient for parameter '{parameter}'")
        self.parameter = parameter


class NumericalAbortError(FluvganError, ArithmeticError):
    """Training stopped on a non-finite loss."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, snapshot: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.snapshot = snapshot or {}
