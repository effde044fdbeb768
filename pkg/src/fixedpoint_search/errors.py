"""Exception types shared across the package."""


class SearchError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(SearchError, ValueError):
    pass


class LayoutMismatchError(SearchError, ValueError):
    pass


class NotUnitaryError(SearchError, ValueError):
    pass


class DegenerateSelectionError(SearchError, ValueError):
    """A selective operation was asked to act on an empty subspace."""


class ZeroBranchError(SearchError):
    """A measurement branch has (numerically) zero probability and cannot be renormalized."""


class LevelTooLargeError(SearchError, ValueError):
    pass


class UnreachableThresholdError(SearchError, ValueError):
    pass


class ConfigError(SearchError, ValueError):
    """Invalid run or scenario configuration."""


class QuadratureError(SearchError):
    """Gauss-Legendre estimate failed to settle when the node count was doubled."""
