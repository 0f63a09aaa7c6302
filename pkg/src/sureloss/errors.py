"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Any


class SureLossError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SureLossError, ValueError):
    """Operands live on outcome spaces of different sizes."""


class InvalidInputError(SureLossError, ValueError):
    """A value violates the invariants of its type."""


class InvalidBasisError(SureLossError):
    """A simplex starting basis is singular or infeasible."""


class InvalidStartError(SureLossError):
    """An interior-point starting point is not strictly positive (or not feasible)."""


class SolverError(SureLossError):
    """A solve did not produce a usable answer.

    ``outcome`` carries the solver diagnostics when they exist.
    """

    def __init__(self, message: str, outcome: Any = None):
        super().__init__(message)
        self.outcome = outcome


class CertificateError(SolverError):
    """A verdict could not be backed by a numerically verified certificate."""


class UnboundedError(SolverError):
    """A natural-extension LP is unbounded (the gamble set incurs sure loss)."""
