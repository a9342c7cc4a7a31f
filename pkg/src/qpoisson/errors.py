"""Exception types shared across the package."""


class QPoissonError(Exception):
    """Base class for all package-specific errors."""


class EncodingError(QPoissonError):
    """A value cannot be represented in the requested fixed-point format."""


class CollisionError(EncodingError):
    """Two eigenvalues encode to the same bitstring; increase f or m."""


class ResourceError(QPoissonError):
    """A requested computation exceeds the configured memory or width budget."""


class PostselectionError(QPoissonError):
    """The ancilla success probability is too small to condition on."""
