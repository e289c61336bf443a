"""Exception types shared across the package."""


class GaitNormError(Exception):
    """Base class for every error this package raises deliberately."""


class ValidationError(GaitNormError, ValueError):
    """Input data or parameters violate a documented invariant or schema."""


class DegenerateGeometryError(GaitNormError, ValueError):
    """An angle was requested at a vertex that coincides with an endpoint."""
