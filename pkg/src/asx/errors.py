"""Exception hierarchy shared by every module."""


class AsxError(Exception):
    """Base class for all errors raised by the package."""


class DegenerateInputError(AsxError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ValidationError(AsxError, ValueError):
    """A value violates a documented invariant."""


class ParseError(AsxError, ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"col {column}")
        if where:
            message = f"{message} (at {' '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class PersistenceError(AsxError, OSError):
    def __init__(self, message, path=None):
        super().__init__(f"{message}: {path}" if path is not None else message)
        self.path = path


class SolverError(AsxError, RuntimeError):
    """The active-set iteration did not reach the KKT tolerance.

    ``best`` holds the last feasible iterate and ``kkt_residual`` the
    largest dual-infeasibility observed for it.
    """

    def __init__(self, message, best=None, kkt_residual=None):
        super().__init__(message)
        self.best = best
        self.kkt_residual = kkt_residual


class TrainingError(AsxError, RuntimeError):
    def __init__(self, message, epoch=None, point=None):
        super().__init__(message)
        self.epoch = epoch
        self.point = point


class EmptyModelError(AsxError, ValueError):
    pass


class ExtractionError(AsxError, ValueError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SynthesisError(AsxError, ValueError):
    pass


class EstimationError(AsxError, RuntimeError):
    pass


class ConfigurationError(AsxError, ValueError):
    pass


class UsageError(AsxError, ValueError):
    """Bad command-line or API usage (unknown shape, bad flag value)."""
