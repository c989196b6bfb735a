"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numeric failures with 3.
"""


class TsclError(Exception):
    """Base class for all package errors."""


class ConfigError(TsclError, ValueError):
    """Invalid schedule, model, or experiment configuration."""


class ShapeError(TsclError, ValueError):
    """Tensor shapes are incompatible for the requested operation."""


class MetricError(TsclError, ValueError):
    """An image metric cannot be evaluated for the given inputs."""


class NumericError(TsclError, ArithmeticError):
    """Non-finite values showed up where finite ones are required."""


class PpmError(TsclError, ValueError):
    """Malformed or unsupported PPM file.

    ``offset`` is the byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class SchemaError(TsclError, ValueError):
    """Experiment logs do not share the expected column schema."""


class DegenerateBatchError(TsclError, ValueError):
    """Batch statistics are undefined (a single value per channel)."""
