import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ConditioningError(np.linalg.LinAlgError):
    """Cholesky factorisation failed even after the maximum jitter."""


class FitError(RuntimeError):
    """No restart of the hyperparameter search produced a finite NLL."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
