"""Exception types shared across the package.

Parameter and dimension errors use the built-in ``ValueError``; the classes
here mark failures of mathematical assumptions that callers may want to
catch separately.
"""

from __future__ import annotations


class NotPositiveDefiniteError(ValueError):
    """Raised when a matrix required to be SPD fails a definiteness check.

    Carries the offending minimum eigenvalue (when it was computed) so that
    degeneracy reports can state how far from positive definite the input was.
    """

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        if min_eigenvalue is not None:
            message = f"{message} (minimum eigenvalue {min_eigenvalue:.6e})"
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class SolverError(RuntimeError):
    """Raised when an iterative or dense solver fails to produce a result.

    Examples: eigensolver non-convergence, or a conjugate-gradient run that
    detects an indefinite operator. The message identifies the iteration or
    diagnostic that triggered the failure.
    """
