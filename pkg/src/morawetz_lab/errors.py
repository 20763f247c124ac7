"""Exception types shared across the package.

The CLI maps these onto exit statuses: configuration problems exit with 2,
numerical-accuracy failures with 3.
"""

from __future__ import annotations


class MorawetzLabError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(MorawetzLabError, ValueError):
    """Array shape does not match the grid it claims to live on."""


class DomainError(MorawetzLabError, ValueError):
    """A parameter lies outside the admissible range of an operation."""


class EllipticityError(DomainError):
    """Lame parameters violate mu > 0 or lambda + 2 mu > 0."""


class ConfigurationError(MorawetzLabError, ValueError):
    """An experiment or CLI run was configured inconsistently."""


class AccuracyError(MorawetzLabError, RuntimeError):
    """A quadrature failed to reach its requested tolerance.

    Carries the tolerance that was achieved so callers can report it.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved
