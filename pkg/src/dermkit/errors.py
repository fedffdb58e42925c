"""Exception types shared across the toolkit."""


class DermkitError(Exception):
    """Base class for all toolkit errors."""


class ContractError(DermkitError, ValueError):
    """A caller violated a documented precondition."""


class ManifestError(DermkitError, ValueError):
    """A manifest file failed to parse or validate.

    ``line`` is the 1-based line number in the manifest file when the
    failure is attributable to a single row.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ImageDecodeError(DermkitError, ValueError):
    """Bytes or a file could not be decoded as a raster image."""


class TrainingDiverged(DermkitError, RuntimeError):
    """Training hit a non-finite loss; ``epoch`` is where it happened."""

    def __init__(self, message: str, epoch: int):
        self.epoch = epoch
        super().__init__(f"{message} (epoch {epoch})")


class UnsupportedArchitecture(DermkitError, TypeError):
    """The model does not expose what the operation requires."""
