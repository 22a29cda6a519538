"""Exception types shared across the package."""


class NotPositiveDefiniteError(ValueError):
    """Raised when a factorization or solve requires an SPD matrix and gets one
    that is not. `pivot` is the 1-based index of the failing Cholesky pivot
    when known."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class DegenerateDiagonalError(ValueError):
    """Raised when a diagonal entry that must be strictly positive is not.
    `index` is the 0-based offending position."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget.
    `gap` carries the last duality gap observed."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


class DimensionMismatchError(ValueError):
    pass


class EmptySampleError(ValueError):
    pass


class InsufficientSampleError(ValueError):
    pass


class InfeasibleSchemeError(ValueError):
    pass


class UndefinedRateError(ValueError):
    pass


class ModelConstructionError(ValueError):
    pass
