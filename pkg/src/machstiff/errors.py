"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):
``ValidationError`` for bad input files or geometry, ``NumericalError`` for
singular, ill-posed or complex-valued computations.
"""

from __future__ import annotations


class MachStiffError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MachStiffError, ValueError):
    pass


class NumericalError(MachStiffError, ArithmeticError):
    pass


# -- input / validation -------------------------------------------------------

class SchemaError(ValidationError):
    pass


class GeometryError(ValidationError):
    pass


class RankError(ValidationError):
    pass


class LevelMismatch(ValidationError):
    def __init__(self, message: str, levels=()):
        super().__init__(message)
        self.levels = tuple(levels)


class ZeroDisplacement(ValidationError):
    pass


class FrameMismatch(ValidationError):
    pass


# -- numerical ----------------------------------------------------------------

class ComplexSpectrum(NumericalError):
    def __init__(self, message: str, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues)


class DegenerateAbscissa(NumericalError):
    pass


class ZeroScale(NumericalError):
    pass


class SingularLoadSet(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class DegenerateProjection(NumericalError):
    pass


class ParallelLines(NumericalError):
    """Two lines are parallel; ``mu`` still carries their separation."""

    def __init__(self, message: str, mu: float = float("nan")):
        super().__init__(message)
        self.mu = mu


class DegenerateDirections(NumericalError):
    pass


class ZeroVector(NumericalError):
    pass


class IllConditioned(UserWarning):
    pass


class LargeRotation(UserWarning):
    pass


class SingularK(SingularMatrix):
    pass
