"""Exception hierarchy. The CLI maps these classes onto exit codes."""


class XGraphError(Exception):
    """Base class for all package errors."""


class ConfigError(XGraphError, ValueError):
    """Invalid user configuration (threshold out of range, empty grid, ...)."""


class DataError(XGraphError, ValueError):
    """Unusable input data: degenerate margins, bad shapes, unreadable files."""


class DimensionError(DataError):
    pass


class SymmetryError(DataError):
    pass


class DegenerateMatrixError(DataError):
    pass


class NotPSDError(DataError):
    pass


class InvalidVariogramError(DataError):
    pass


class InvalidPrecisionError(DataError):
    pass


class StructureError(DataError):
    """A graph does not have the structure an operation requires."""


class ConvergenceError(XGraphError, RuntimeError):
    """An iterative solver hit its iteration cap before its tolerance."""
