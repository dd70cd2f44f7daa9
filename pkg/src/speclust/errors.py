"""Exception types shared across the package.

Everything derives from SpeclustError (itself a ValueError) so callers can
catch the whole family or rely on plain ValueError semantics.
"""


class SpeclustError(ValueError):
    """Base class for all errors raised by this package."""


class ShapeError(SpeclustError):
    """Operands have incompatible or invalid dimensions."""


class ConvergenceError(SpeclustError):
    """An iterative solver exhausted its iteration budget."""


class RankError(SpeclustError):
    """A matrix is rank deficient where full rank is required."""


class DegenerateRankError(RankError):
    """All singular values vanish (zero input)."""


class ParameterError(SpeclustError):
    """An argument is outside its documented domain."""


class BandwidthError(SpeclustError):
    """A kernel bandwidth is zero or undefined for some point."""


class IsolatedVertexError(SpeclustError):
    """A graph vertex has zero degree, so D^{-1/2} is undefined."""


class DegeneratePartitionError(SpeclustError):
    """A bipartition has a side with zero association weight."""


class SizeGuardError(SpeclustError):
    """An exhaustive oracle was asked for more work than its hard cap."""


class GapError(SpeclustError):
    """The eigen-gap does not support the requested computation."""


class DegenerateClusteringError(SpeclustError):
    """A clustering has an empty cluster where all must be nonempty."""


class ParseError(SpeclustError):
    """Malformed input text; message carries the offending line number."""
