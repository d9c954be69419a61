"""Exception types signalled by the estimators and the inference stack."""


class LatentBnError(Exception):
    """Base class for all package-specific errors."""


class DegenerateColumnError(LatentBnError):
    """A data column is constant, so rank statistics are undefined."""


class IllConditionedError(LatentBnError):
    """A matrix inversion required by a test or score is singular."""


class InsufficientSampleError(LatentBnError):
    """The effective sample size is too small for the requested test."""


class CollinearityError(LatentBnError):
    """A local score is undefined because the parent design is rank deficient."""


class ConstantOutputError(LatentBnError):
    """A sensitivity index is undefined because the output has zero variance."""


class GraphFormatError(LatentBnError):
    """A graph file or document does not parse as a valid graph."""
