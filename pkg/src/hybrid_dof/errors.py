"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class NumericalFailure(ArithmeticError):
    """A numerical kernel failed to converge or produced non-finite output."""


class DegenerateChannelError(NumericalFailure):
    """A generic-rank assumption failed at the configured tolerance."""


class InfeasibleSchemeError(InvalidArgumentError):
    """A beamforming scheme's dimension requirement is violated."""


class InvalidDesignError(ValueError):
    """A design cannot be evaluated, e.g. its combiner is not injective."""


class SweepDegradedError(RuntimeError):
    """Too many Monte-Carlo trials failed; ``table`` holds the partial result."""

    def __init__(self, message, table):
        super().__init__(message)
        self.table = table
