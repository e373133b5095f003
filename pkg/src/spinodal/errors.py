"""Exception hierarchy.

Every error raised on purpose by the package derives from ``SpinodalError``
so callers (notably the CLI) can separate usage problems from bugs.
"""


class SpinodalError(Exception):
    pass


class InvalidDimensionError(SpinodalError, ValueError):
    pass


class ShapeError(SpinodalError, ValueError):
    pass


class DomainError(SpinodalError, ValueError):
    pass


class ConstructionError(SpinodalError, ValueError):
    pass


class CalibrationError(SpinodalError):
    pass


class StencilError(SpinodalError, ValueError):
    pass


class GeometryError(SpinodalError, ValueError):
    pass


class SingularityError(SpinodalError, ValueError):
    pass


class WrongOrderError(SpinodalError):
    pass


class FitError(SpinodalError):
    pass


class HypothesisError(SpinodalError):
    """Growth precondition of the harmonic decomposition is not met."""


class ResolutionError(SpinodalError):
    pass


class DegenerateFieldError(SpinodalError):
    pass


class NoLimitError(SpinodalError):
    pass


class EstimatorError(SpinodalError, ValueError):
    pass


class ConfigError(SpinodalError, ValueError):
    pass
