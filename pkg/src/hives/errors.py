"""Exception types shared across the package."""


class HiveError(Exception):
    """Base class for all package errors."""


class LengthMismatch(HiveError, ValueError):
    pass


class NotWeaklyDecreasing(HiveError, ValueError):
    pass


class SaturationViolated(HiveError, ValueError):
    pass


class IncompleteHive(HiveError, ValueError):
    pass


class DegenerateDimension(HiveError, ValueError):
    pass


class InvalidSpec(HiveError, ValueError):
    pass


class NotSymmetric(HiveError, ValueError):
    pass


class EigenFailure(HiveError, ArithmeticError):
    pass


class IllConditionedJointMatrix(HiveError, ArithmeticError):
    pass


class NeverConverged(HiveError, ArithmeticError):
    pass


class MixedSizes(HiveError, ValueError):
    pass


class EmptyList(HiveError, ValueError):
    pass


class DegenerateTriangle(HiveError, ArithmeticError):
    pass


class CapExceeded(HiveError, RuntimeError):
    """Enumeration aborted; ``lower_bound`` holds the points counted so far."""

    def __init__(self, message, lower_bound=0):
        super().__init__(message)
        self.lower_bound = lower_bound


class UnboundedPolytope(HiveError, ValueError):
    pass


class EmptyPolytope(HiveError, ValueError):
    pass


class StartNotInterior(HiveError, ValueError):
    pass


class InfeasibleLP(HiveError, ValueError):
    pass


class NonIntegralOptimum(HiveError, ArithmeticError):
    pass


class InfeasiblePoint(HiveError, ValueError):
    pass
