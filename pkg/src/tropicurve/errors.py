"""Exception hierarchy for tropicurve.

Exceptions are grouped by the surface that raises them.  Everything derives
from :class:`TropicurveError` so callers can catch broadly; the CLI maps
subfamilies onto exit codes (input errors -> 2, search/budget failures -> 3).
"""


class TropicurveError(Exception):
    """Base class for all errors raised by this package."""


# -- graph construction / geometry -----------------------------------------

class DisconnectedGraph(TropicurveError):
    pass


class NonpositiveLength(TropicurveError):
    pass


class DanglingEndpoint(TropicurveError):
    pass


class PointsNotOnEdge(TropicurveError):
    pass


class PointNotInterior(TropicurveError):
    pass


class WrongCardinality(TropicurveError):
    pass


class UnknownEdge(TropicurveError):
    pass


class UnknownVertex(TropicurveError):
    pass


class DuplicateId(TropicurveError):
    pass


class InvalidOffset(TropicurveError):
    pass


# -- divisors and piecewise linear functions -------------------------------

class NonzeroDegree(TropicurveError):
    pass


class NotPrincipal(TropicurveError):
    pass


class WrongDegree(TropicurveError):
    pass


class InvalidPillars(TropicurveError):
    pass


class NotComplement(TropicurveError):
    pass


class DiscontinuousFunction(TropicurveError):
    pass


# -- tropicalization --------------------------------------------------------

class EmptyCoordinates(TropicurveError):
    pass


class ContractedEdge(TropicurveError):
    pass


class InvalidCoordinate(TropicurveError):
    """A function attached to an embedding fails the harmonicity checks."""


class DivisorCollision(TropicurveError):
    pass


class NonSimplePoint(TropicurveError):
    pass


# -- synthesis pipelines -----------------------------------------------------

class NotSeparated(TropicurveError):
    pass


class PillarFailure(TropicurveError):
    pass


class PillarSearchExhausted(TropicurveError):
    """Raised with the constraint set that could not be met."""


class NoRoom(TropicurveError):
    pass


class EqualEdges(TropicurveError):
    pass


class Stage0Failure(TropicurveError):
    pass


class CertificateFailure(TropicurveError):
    pass


class MonotonicityViolation(TropicurveError):
    """Singular-vertex count failed to decrease; indicates a bug."""


# -- i/o ----------------------------------------------------------------------

class ParseError(TropicurveError):
    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{message} (at {path})"
        super().__init__(message)


INPUT_ERRORS = (
    DisconnectedGraph, NonpositiveLength, DanglingEndpoint, PointsNotOnEdge,
    PointNotInterior, WrongCardinality, UnknownEdge, UnknownVertex,
    InvalidOffset, NonzeroDegree, WrongDegree, InvalidPillars, NotComplement,
    DiscontinuousFunction, EmptyCoordinates, InvalidCoordinate, ParseError,
)

SEARCH_ERRORS = (PillarSearchExhausted, NoRoom, Stage0Failure)
