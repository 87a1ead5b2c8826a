"""Exception types shared across the package."""


class ShapeError(ValueError):
    """An operand's dimensions do not satisfy an operation's contract."""


class DatasetError(Exception):
    """Dataset tree is missing, empty, malformed, or undecodable."""


class ImageFormatError(DatasetError):
    """An image file is not in a supported format/bit depth."""


class CheckpointError(Exception):
    """Base class for checkpoint read failures."""


class NotACheckpointError(CheckpointError):
    """File does not start with the checkpoint magic bytes."""


class UnsupportedVersionError(CheckpointError):
    """Checkpoint format version is not supported by this build."""


class TruncatedCheckpointError(CheckpointError):
    """Checkpoint ends mid-record."""


class CorruptCheckpointError(CheckpointError):
    """Checkpoint contents are internally inconsistent."""


class LaserMismatchError(Exception):
    """Requested laser color disagrees with the checkpoint's."""
