"""Exception types shared across the package."""


class FieldNetError(Exception):
    """Base class for all package errors."""


class IdxFormatError(FieldNetError):
    """Malformed IDX container (bad magic, truncation, dim mismatch)."""


class DatasetError(FieldNetError):
    """Dataset contents violate expectations (bad label, bad ordinal)."""


class ConfigMismatchError(FieldNetError):
    """Objects built from different physical configurations were mixed."""


class BuildError(FieldNetError):
    """Network construction rejected its inputs."""


class SelectionError(FieldNetError):
    """Reference selection could not satisfy the request."""


class ArchiveError(FieldNetError):
    """Network archive is malformed or inconsistent."""
