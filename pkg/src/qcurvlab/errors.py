"""Exception types shared across the package."""


class DomainError(ValueError):
    """A finite-difference stencil or sample point escapes the chart domain."""


class MetricError(ValueError):
    """A sampled metric matrix is not symmetric positive definite."""


class ResolutionError(ValueError):
    """A spectral field is underresolved on its quadrature grid."""
