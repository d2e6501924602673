"""Exception types shared across the package."""


class GpseqError(Exception):
    """Base class for all package-specific errors."""


class CholeskyFailure(GpseqError):
    """Correlation matrix is not numerically positive definite.

    Usually signals duplicate points or a nugget that is too small; the
    caller may retry with a larger jitter.
    """


class NumericalBreakdown(GpseqError):
    """A computed quantity is outside the range explainable by round-off."""


class DegenerateAugmentation(GpseqError):
    """Rank-one inverse update rejected: new point numerically duplicates
    an existing one (Schur complement below tolerance)."""


class AllInfeasible(GpseqError):
    """Every likelihood evaluation hit the infeasibility sentinel."""


class EmptyPool(GpseqError):
    """Candidate pool contains no usable candidates."""


class NonGridQuery(GpseqError):
    """A table-lookup objective was queried off its grid."""


class SizeOverflow(GpseqError):
    """A full-factorial grid request exceeds the configured cap."""


class ConfigError(GpseqError):
    """Invalid experiment or run configuration."""
