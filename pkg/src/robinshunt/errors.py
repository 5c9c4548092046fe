import numpy as np


class ConfigurationError(ValueError):
    """Invalid geometry or experiment configuration."""


class MeshError(RuntimeError):
    pass


class AssemblyError(RuntimeError):
    pass


class DomainError(ValueError):
    """Argument outside the domain of an operation (e.g. non-positive gamma)."""


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Cholesky breakdown.

    ``pivot`` is the 1-based index, in the caller's original ordering, of the
    row at which a non-positive pivot appeared.
    """

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = int(pivot)
        super().__init__(message or f"matrix is not positive definite (pivot {self.pivot})")
