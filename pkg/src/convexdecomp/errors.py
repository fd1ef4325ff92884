"""Exception types raised by the library.

The CLI maps these to exit codes (see :mod:`convexdecomp.cli`).
"""


class ConvexDecompError(Exception):
    """Base class for library errors."""


class DimensionError(ConvexDecompError, ValueError):
    """Operands live in spaces of different dimension."""


class RangeError(ConvexDecompError, ArithmeticError):
    """An exponential kernel argument exceeded the overflow limit."""


class SpecFormatError(ConvexDecompError, ValueError):
    """A function-spec document could not be loaded."""


class OracleError(ConvexDecompError):
    """A subgradient oracle returned a vector that is not a subgradient."""


class InconclusiveError(ConvexDecompError):
    """Sampling did not stabilize the rank of the subgradient-difference span.

    ``partial`` holds the decomposition assembled from the samples seen so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InconsistencyError(ConvexDecompError):
    """The two characterizations of the constancy subspace disagree."""


class PreconditionError(ConvexDecompError, ValueError):
    """An operation's input precondition does not hold.

    ``direction`` optionally carries the offending vector (e.g. a flat
    direction when a witness was requested for a function constant on a line).
    """

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction
