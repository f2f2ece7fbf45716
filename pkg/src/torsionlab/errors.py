"""Exception types shared across the package.

Two failure families matter to callers (and to the CLI exit-code contract):
data that fails validation (bad group tables, non-composable shapes, delta
squared nonzero, inexact sequences) and numerical procedures that cannot
deliver their advertised accuracy.
"""

from __future__ import annotations


class TorsionLabError(Exception):
    """Base class for package errors."""


class DataValidationError(TorsionLabError):
    """Input data violates a structural precondition.

    ``location`` carries a human-readable pointer to the offending piece
    (degree, cell pair, entry index) when one is known.
    """

    def __init__(self, message: str, location: str | None = None):
        super().__init__(message if location is None else f"{message} [at {location}]")
        self.location = location


class NumericalError(TorsionLabError):
    """A numerical routine failed to meet its accuracy contract."""


class QuadratureError(NumericalError):
    """Quadrature refinement hit its budget without converging.

    ``bracket`` holds the last two successive estimates.
    """

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (last estimates: {bracket[0]!r}, {bracket[1]!r})")
        self.bracket = bracket
