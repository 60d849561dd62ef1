class QImageGenError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(QImageGenError, ValueError):
    pass


class NotDifferentiableError(QImageGenError, ValueError):
    pass


class QubitIndexError(QImageGenError, IndexError):
    pass


class EntanglerError(QImageGenError, ValueError):
    pass


class CodecError(QImageGenError, ValueError):
    pass


class ParameterLayoutError(QImageGenError, ValueError):
    pass


class ShotError(QImageGenError, ValueError):
    pass


class MetricError(QImageGenError, ValueError):
    pass


class DatasetError(QImageGenError, ValueError):
    pass


class BadMagicError(DatasetError):
    pass


class TruncatedFileError(DatasetError):
    pass


class CountMismatchError(DatasetError):
    pass


class CheckpointError(QImageGenError, RuntimeError):
    pass


class TrainingDivergedError(QImageGenError, RuntimeError):
    pass
