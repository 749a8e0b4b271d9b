"""Exception types raised across the package.

Structural impossibilities (a color that can never meet its quota, an oracle
asked to enumerate too many subsets) are hard errors; a diversity threshold
that merely fails the feasibility check is signalled by return value, not by
an exception.
"""


class FairDivError(Exception):
    """Base class for all package-specific errors."""


class EmptyDataset(FairDivError):
    """An operation that needs at least one point received none."""


class InvalidCoordinate(FairDivError):
    """A coordinate was non-finite or rows disagree on dimension."""


class InvalidRadius(FairDivError):
    """A ball query was issued with a negative radius."""


class UnknownPoint(FairDivError):
    """A point id outside [0, n) was passed to an index operation."""


class ExhaustedMass(FairDivError):
    """sample_remove was called with no sampling mass left."""


class TooFewPoints(FairDivError):
    """Candidate distances need at least two points."""


class EmptyCandidates(FairDivError):
    """Every pairwise distance is zero, leaving no usable candidate."""


class NotEnoughPoints(FairDivError):
    """A selection of k points was requested from fewer than k points."""


class ColorDeficit(FairDivError):
    """Some color has fewer points than its required quota."""


class NoFeasibleGamma(FairDivError):
    """No candidate diversity value passed the feasibility check."""


class FailedAfterRepeats(FairDivError):
    """Every high-probability rounding repetition missed a color threshold."""


class OracleTooLarge(FairDivError):
    """A brute-force reference was asked to run beyond its size guard."""


class SpecUnsatisfiable(FairDivError):
    """No subset of the input can meet the per-color quotas."""


class SpecUnsatisfiableOnCoreset(FairDivError):
    """The per-color center budget is below some color quota."""


class UnknownColor(FairDivError):
    """A streamed point carries a color id outside the declared range."""


class SpecUnsatisfiableOnSynopsis(FairDivError):
    """A stream query ran before some color collected enough centers."""
