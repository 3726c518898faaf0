"""Exception hierarchy.

Everything raised deliberately by the package derives from :class:`OdrsError`
so callers (the CLI in particular) can map failures to exit codes.
"""


class OdrsError(Exception):
    """Base class for package errors."""


class InvalidSpec(OdrsError, ValueError):
    """Bad input parameters; the CLI maps these to exit code 2."""


class DimensionMismatch(InvalidSpec):
    pass


class NonSPD(OdrsError, ArithmeticError):
    """A nonpositive pivot was met while factorizing a matrix assumed SPD."""


class NonPositiveScale(InvalidSpec):
    pass


class NegativeThreshold(InvalidSpec):
    pass


class NonPositiveLambda(InvalidSpec):
    pass


class NonPositiveStep(InvalidSpec):
    pass


class InvalidSparsity(InvalidSpec):
    pass


class MuNotPositive(InvalidSpec):
    pass


class IndexOutOfRange(OdrsError, IndexError):
    pass


class StreamExhausted(IndexOutOfRange):
    pass


class InnerSolveFailed(OdrsError, ArithmeticError):
    """The inner Newton solve hit its iteration cap before reaching tol."""


class MaxIterations(OdrsError, ArithmeticError):
    pass


class NonFiniteIterate(OdrsError, ArithmeticError):
    """A solver iterate left the finite range (divergence guard tripped).

    ``trace`` holds the records emitted before the failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class NonFiniteTrace(OdrsError, ValueError):
    pass
