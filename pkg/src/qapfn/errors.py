"""Exception hierarchy shared by all qapfn modules."""

from __future__ import annotations


class QAPError(Exception):
    """Base class for every error raised by qapfn."""


# instance / solution files
class TruncatedFile(QAPError, ValueError):
    pass


class NonSquareData(QAPError, ValueError):
    pass


class NonFiniteEntry(QAPError, ValueError):
    pass


class NonzeroDiagonal(QAPError, ValueError):
    pass


class DimensionMismatch(QAPError, ValueError):
    pass


class NotAPermutation(QAPError, ValueError):
    pass


class NetworkFailure(QAPError, OSError):
    pass


class ChecksumMismatch(QAPError, ValueError):
    pass


class InstanceNotFound(QAPError, LookupError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__(f"not found: {', '.join(self.names)}")


class MissingBestKnown(QAPError, LookupError):
    pass


# binary space / neighbourhood
class IndexOutOfRange(QAPError, IndexError):
    pass


class SameBlockOrResidue(QAPError, ValueError):
    pass


class TupleNotApplicable(QAPError, ValueError):
    pass


class InfeasibleSolution(QAPError, ValueError):
    pass


class PairNotInNeighbourhood(QAPError, ValueError):
    pass


class ModeUnsupportedForInstance(QAPError, ValueError):
    pass


class IndexMisalignment(QAPError, ValueError):
    pass


# heuristics
class EmptyNeighbourhood(QAPError, ValueError):
    pass


class AllMovesTabu(QAPError):
    """Every candidate is tabu; ``fallback`` holds the best-theta row."""

    def __init__(self, fallback: int):
        self.fallback = fallback
        super().__init__(f"all moves tabu, fallback row {fallback}")


class DegenerateSamples(QAPError, ValueError):
    pass
