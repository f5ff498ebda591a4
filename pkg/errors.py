"""
Exception hierarchy.

Every error carries the process exit code the CLI reports for it:
2 for usage and domain errors, 1 for failed checks, 3 for exceeded budgets.
"""


class GeolabError(Exception):
    """Base class for all geolab errors"""
    exit_code = 1

    def __init__(self, message=''):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return f"{type(self).__name__}: {self.message}" if self.message else type(self).__name__


class UsageError(GeolabError):
    exit_code = 2


class NonFiniteInput(UsageError):
    pass


class InvalidExponent(UsageError):
    pass


class InvalidExponents(InvalidExponent):
    pass


class NotPsd(UsageError):
    pass


class DimensionMismatch(UsageError):
    pass


class OrderViolated(UsageError):
    pass


class SingularCoefficient(UsageError):
    pass


class DegenerateBasis(UsageError):
    pass


class SampleTooSmall(UsageError):
    pass


class NotInSubspace(UsageError):
    pass


class Disconnected(UsageError):
    pass


class CollapsedPair(UsageError):
    pass


class InvalidChain(UsageError):
    pass


class NotAMartingale(UsageError):
    pass


class TooLarge(GeolabError):
    exit_code = 3


class NoConvergence(GeolabError):
    """Solver hit its iteration cap; keeps the best residual seen."""
    exit_code = 1

    def __init__(self, message='', best_residual=float('inf'), iters=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iters = iters


class ChecksFailed(GeolabError):
    """A command ran to completion but at least one recorded check failed."""
    exit_code = 1
