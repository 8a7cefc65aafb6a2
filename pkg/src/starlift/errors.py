"""Exception hierarchy shared by every module of the package."""


class StarliftError(Exception):
    """Base class for all errors raised by starlift."""


class SpaceError(StarliftError, ValueError):
    """An atom is missing from its space, or two spaces do not line up."""


class DistributionError(StarliftError, ValueError):
    """Masses are negative, non-rational, or sum to more than one."""


class WitnessShapeError(StarliftError, ValueError):
    """A witness does not have the shape its lifting kind expects."""


class ValidationFailed(StarliftError):
    """An input witness was required to validate but did not.

    The failing :class:`~starlift.lifting.ValidationReport` is kept on
    ``report`` so callers can inspect which condition broke.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class HypothesisError(StarliftError, ValueError):
    """A side condition of a composition or transfer rule does not hold."""


class OracleCapExceeded(StarliftError):
    """The brute-force subset oracle refused an instance that is too large."""


class NegativeCapacity(StarliftError):
    """The star edge of a Strassen network would get a negative capacity.

    This happens exactly when ``|mu1| > k*|mu2| + delta``, i.e. the whole
    left space already violates the witness-free lifting condition.
    ``subset`` holds that violating subset.
    """

    def __init__(self, message, subset):
        super().__init__(message)
        self.subset = subset
