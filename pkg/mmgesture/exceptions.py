"""
Exception hierarchy for mmgesture.
"""


class MmGestureError(Exception):
    """Base class for every error raised by mmgesture."""


class ConfigError(MmGestureError):
    """Configuration file could not be read or is invalid."""


class ShapeMismatchError(MmGestureError, ValueError):
    """Array dimensions do not match the radar configuration."""


class RangeGateError(MmGestureError, ValueError):
    """A scripted motion leaves the kept range bins or the angular field."""


class SequenceTooShortError(MmGestureError, ValueError):
    """A sequence is too short for the requested operation."""


class ChannelsUnavailableError(MmGestureError):
    """Per-channel range-Doppler data was not retained for this sequence."""


class FileFormatError(MmGestureError):
    """A binary file has a bad magic, version or size."""


class TrainingError(MmGestureError):
    """Training could not start or diverged."""


class EmptyInputError(MmGestureError, ValueError):
    """An operation received an empty collection it cannot work on."""


class LabelError(MmGestureError, ValueError):
    """A label is missing or not valid for the requested operation."""
