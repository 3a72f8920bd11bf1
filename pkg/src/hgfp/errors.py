"""Exception types shared across the package."""


class Error(Exception):
    """Base class for all hgfp errors."""


class ConfigError(Error):
    """Invalid configuration or inconsistent shapes at construction time."""


class OutOfBoundsError(Error):
    """A query position lies outside the bounding box or lattice range."""

    def __init__(self, message, axis=None, point_index=None):
        super().__init__(message)
        self.axis = axis
        self.point_index = point_index


class FormatError(Error):
    """A file failed structural validation (magic, version, truncation, NaN)."""


class CorruptionError(Error):
    """A bitstream failed an integrity check (checksum, counts, payload)."""


class PositionMismatchError(Error):
    """Decoder-side positions disagree with the positions used at encode time."""


class DynamicRangeError(Error):
    """A quantized symbol exceeded the representable magnitude."""


class VerificationError(Error):
    """An end-to-end losslessness check failed."""
