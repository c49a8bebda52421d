"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage and I/O problems exit 2,
data-contract violations (ParseError, ValidationError, DataError) exit 3,
numerical failures (SolverError) exit 4.
"""

from __future__ import annotations


class SasvkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SasvkitError):
    """Malformed line in a text input; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ValidationError(SasvkitError):
    """Record or configuration violates a documented invariant."""


class AudioFormatError(SasvkitError):
    """WAV file is missing, truncated, or uses an unsupported layout."""


class DataError(SasvkitError):
    """Dataset cannot support the requested computation (empty class,
    missing metadata, misaligned keys, ...)."""


class SolverError(SasvkitError):
    """Iterative fit did not converge; carries the final gradient norm."""

    def __init__(self, message: str, grad_norm: float | None = None):
        self.grad_norm = grad_norm
        if grad_norm is not None:
            message = f"{message} (gradient norm {grad_norm:.3e})"
        super().__init__(message)


class NoConcurrentPointError(SasvkitError):
    """Tandem equal-error search found no operating point where all three
    error rates agree on the searched grid."""
