"""Exception types shared across the package.

Everything derives from ValueError so callers can catch broadly, while tests
and the CLI can distinguish the specific failure.
"""


class SepscaleError(ValueError):
    """Base class for all errors raised by this package."""


class ShapeError(SepscaleError):
    """A tensor dimension does not match what an operation requires."""


class ConfigError(SepscaleError):
    """A configuration value is out of range or inconsistent."""


class WeightLoadError(SepscaleError):
    """A weight store is missing a tensor or holds one with the wrong shape."""


class InputTooShortError(SepscaleError):
    """The audio input is shorter than one encoder frame."""


class ZeroReferenceError(SepscaleError):
    """SI-SDR is undefined for an all-zero reference signal."""


class WeightFormatError(SepscaleError):
    """A weight file violates the binary container format."""


class BadMagicError(WeightFormatError):
    """The file does not start with the expected magic bytes."""


class UnsupportedVersionError(WeightFormatError):
    """The file declares a format version this reader does not support."""


class ChecksumError(WeightFormatError):
    """The trailing CRC32 does not match the file contents."""


class TruncatedFileError(WeightFormatError):
    """The file ends before the declared contents are complete."""


class WavFormatError(SepscaleError):
    """A WAV file is malformed or uses an unsupported encoding."""
