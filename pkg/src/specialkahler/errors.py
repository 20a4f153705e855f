"""Exception hierarchy.

Domain errors are raised when an input lies outside the region where an
operation is defined; numerical errors when a computation cannot reach its
stated accuracy. The CLI maps the latter to exit code 3.
"""


class GeometryError(Exception):
    pass


class DomainError(GeometryError, ValueError):
    pass


class NumericalError(GeometryError):
    pass


# charts and orbifold structure
class DegeneratePoint(DomainError):
    pass


class OnExceptionalSet(DomainError):
    pass


class NotSingular(DomainError):
    pass


class WeightMismatch(DomainError):
    pass


# metrics and derivatives
class SingularMetric(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class StepFailure(NumericalError):
    pass


class FitFailure(NumericalError):
    pass


class NoSingleConstant(NumericalError):
    pass


# Gibbons-Hawking fields
class AtSource(DomainError):
    pass


class OnString(DomainError):
    pass


class CriticalPoint(DomainError):
    pass


class RegionTooSmall(DomainError):
    pass


# torus combinatorics
class NotInvariant(DomainError):
    pass


class NotIsolated(DomainError):
    pass


# gluing and G2
class BadPrimitive(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


class NotPositive(GeometryError):
    pass
