"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command-line layer
can translate failures without a lookup table.
"""

from __future__ import annotations


class QGraphError(Exception):
    exit_code = 1


class SpecError(QGraphError, ValueError):
    """Malformed input: bad shapes, bad graph, bad JSON."""

    exit_code = 2


class InvalidMatrix(SpecError):
    pass


class ShapeError(SpecError):
    pass


class GraphError(SpecError):
    pass


class GridError(SpecError):
    pass


class InvalidArgument(SpecError):
    pass


class ZeroK(InvalidArgument):
    pass


class ScopeError(QGraphError):
    """The request is outside what the theory covers for these inputs."""

    exit_code = 3


class IrregularPencil(ScopeError):
    pass


class RankDeficient(ScopeError):
    pass


class WrongClass(ScopeError):
    pass


class NotAnEigenvalue(ScopeError):
    pass


class NumericalError(QGraphError):
    exit_code = 4


class ContourThroughZero(NumericalError):
    pass


class ContourTooClose(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class KappaTooSmall(NumericalError):
    pass


class SingularStep(NumericalError):
    pass


class NotAStarGraph(QGraphError):
    exit_code = 5


class OnSpectrum(QGraphError):
    exit_code = 6


class PoleOfCayley(QGraphError):
    exit_code = 7

    def __init__(self, k: complex, message: str | None = None):
        self.k = complex(k)
        super().__init__(message or f"k = {self.k} is a pole of the Cayley transform")
