"""Exception hierarchy shared by all `attnet` modules."""

__all__ = [
    "AttnetError",
    "ShapeError",
    "TensorFormatError",
    "DatasetError",
    "ManifestError",
    "ShapeInconsistencyError",
    "LabelRangeError",
]


class AttnetError(Exception):
    """Base class for all errors raised deliberately by `attnet`."""

    code = "error"


class ShapeError(AttnetError, ValueError):
    code = "shape"


class TensorFormatError(AttnetError, ValueError):
    code = "format"


class DatasetError(AttnetError, ValueError):
    """Raised when a multi-view dataset cannot be loaded or validated."""

    code = "dataset"


class ManifestError(DatasetError):
    code = "manifest"


class ShapeInconsistencyError(DatasetError):
    code = "shape"


class LabelRangeError(DatasetError):
    code = "labels"
