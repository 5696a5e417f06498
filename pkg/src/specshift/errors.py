"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data/format
problems exit 2, numerical failures exit 3.
"""


class SpecshiftError(Exception):
    """Base class for all package errors."""


class DimensionError(SpecshiftError, ValueError):
    """Array shape or parity (odd height/width) violates a contract."""


class DataFormatError(SpecshiftError):
    """Malformed input bytes, manifests, or config files."""


class IntegrityError(DataFormatError):
    """Manifest and tensor/label payloads disagree."""


class NumericalError(SpecshiftError):
    """Non-finite values or a numerically failed computation."""


class TrainingDiverged(NumericalError):
    """Training produced a non-finite loss; carries a state dump path."""

    def __init__(self, message: str, dump_path: str | None = None):
        super().__init__(message)
        self.dump_path = dump_path
