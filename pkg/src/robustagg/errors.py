"""Exception hierarchy.

Every domain error raised by the package derives from :class:`AggregationError`
(itself a :class:`ValueError`), so callers can catch one type.
"""


class AggregationError(ValueError):
    """Base class for all domain errors."""


# model
class OrderingViolation(AggregationError):
    pass


class PriorOutOfRange(AggregationError):
    pass


class DegenerateScenario(AggregationError):
    pass


class OneSidedMarginal(AggregationError):
    pass


class PriorMismatch(AggregationError):
    pass


class SignViolation(AggregationError):
    pass


class MixtureViolation(AggregationError):
    pass


class ZeroDenominator(AggregationError):
    pass


# shared
class SizeMismatch(AggregationError):
    pass


# hull
class OutOfDomain(AggregationError):
    pass


# feasible
class MeanOutOfRange(AggregationError):
    pass


class InfeasibleConstruction(AggregationError):
    pass


class EmptyState(AggregationError):
    pass


# lp
class MalformedProgram(AggregationError):
    pass


# optimize / fullgame
class NoRegion(AggregationError):
    pass


class LiftFailure(AggregationError):
    pass


class SizeCap(AggregationError):
    pass


# cli
class BadConfig(AggregationError):
    pass
