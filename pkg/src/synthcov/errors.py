"""Exception types shared across the package."""


class SynthcovError(Exception):
    """Base class for all synthcov errors."""


class NotPositiveDefinite(SynthcovError):
    """Matrix is not symmetric positive definite, or a Cholesky pivot fell below tolerance."""


class DimensionMismatch(SynthcovError):
    """Array shapes do not conform."""


class BadBlockSize(SynthcovError):
    """Block split index outside the valid range for the partition."""


class BadDof(SynthcovError):
    """Degrees of freedom too small for the requested distribution."""


class TooFewRows(SynthcovError):
    """Fewer observations than the minimum (p + 1) required to fit or summarize."""


class SingularSample(SynthcovError):
    """Sample covariance/scatter matrix is numerically singular."""


class EmptyDistribution(SynthcovError):
    """Empirical distribution holds no simulated values."""


class BadProbability(SynthcovError):
    """Probability argument outside its valid range."""


class MetadataMismatch(SynthcovError):
    """Null distribution was simulated for different (kind, n, p, part) than requested."""


class ParseError(SynthcovError):
    """Malformed CSV/JSON input."""
