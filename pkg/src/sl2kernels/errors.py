"""Exception types shared across the library.

Numerical failure modes carry their best estimates so that callers can
decide whether a degraded answer is still useful.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class NonConvergence(RuntimeError):
    """Quadrature failed to meet tolerance within the panel budget.

    Attributes
    ----------
    best : complex
        The last (best) estimate computed before giving up.
    error : float
        The estimated error of ``best``.
    """

    def __init__(self, message: str, best: complex = 0.0, error: float = float("inf")):
        super().__init__(message)
        self.best = best
        self.error = error


class BadHint(ValueError):
    """A support hint was violated: the integrand is visibly nonzero on the
    boundary of the claimed support region."""


class SmallCell(DomainError):
    """Big-cell coordinates requested for a matrix with |c| below threshold."""


class ChartSingularity(DomainError):
    """Chart-based differential operator evaluated too close to a chart
    singularity to be meaningful."""


class ParityError(DomainError):
    """Two-type evaluation requested for types of opposite parity."""


class CoprimalityError(DomainError):
    """Hecke index not coprime to the level where coprimality is required."""


class NotInGroup(DomainError):
    """Matrix is not a member of the congruence subgroup in question."""


class OverflowGuard(OverflowError):
    """Lattice query bounds large enough that entry products could overflow
    64-bit intermediates."""


class CertificationFailure(RuntimeError):
    """A constructed object failed its own sampled certificate (derivative
    bounds, positivity table, or profile envelope)."""


class ConfigError(ValueError):
    """Invalid experiment or CLI configuration."""


class DegenerateCartanWarning(UserWarning):
    """Rotation-axis input to the polar chart; the returned coordinates use
    the canonical representative (0, 0, total rotation)."""
