"""Exception types raised by gridknn."""


class GridKnnError(Exception):
    """Base class for all gridknn errors."""


class NonMonotonicError(GridKnnError, ValueError):
    """Row-split offsets decrease somewhere."""


class BadBoundsError(GridKnnError, ValueError):
    """Row-split offsets do not start at 0 or do not end at the vertex count."""


class OutOfRangeError(GridKnnError, IndexError):
    """A vertex id lies outside the point cloud."""


class TooFewDimsError(GridKnnError, ValueError):
    """Fewer than two coordinate dimensions are available for binning."""


class BadKError(GridKnnError, ValueError):
    """Requested neighbour count is not a positive integer."""


class IndexMismatchError(GridKnnError, ValueError):
    """A bin index was built for a different point cloud."""


class ShapeMismatchError(GridKnnError, ValueError):
    """Array arguments disagree on shape."""


class BadShapeError(GridKnnError, ValueError):
    """An array argument has the wrong rank, dtype or layout."""


class BadCapacityError(GridKnnError, ValueError):
    """An association-matrix capacity is too small to hold a result row."""


class BackendUnavailableError(GridKnnError, RuntimeError):
    """The requested kernel backend is not installed."""


class VerificationFailedError(GridKnnError, RuntimeError):
    """Binned and brute-force results disagree."""


class FileFormatError(GridKnnError, OSError):
    """A data file is malformed or has an unknown magic tag."""
