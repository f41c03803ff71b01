"""Exception hierarchy.

Every error raised on purpose by the package derives from ``StaticMDError``.
The CLI maps the two families below to exit codes: ``NumericalError`` -> 2,
``DataError`` -> 65.
"""


class StaticMDError(Exception):
    pass


class NumericalError(StaticMDError):
    """A computation ran but could not produce a trustworthy number."""


class DataError(StaticMDError, ValueError):
    """Input data violates a precondition (shape, sign, file format)."""


class DegeneracyError(DataError):
    """Current magnitude R is not strictly positive."""


class MeshError(DataError):
    """Mesh too coarse or malformed for the finite-difference stencil."""


class NormalizationError(DataError):
    """Dyad does not satisfy the normalization iota^C o_C = 1."""


class QuadratureError(DataError):
    pass


class CaseError(DataError):
    """Exponent arithmetic matches neither Sobolev inequality case."""


class HypothesisError(DataError):
    """Exponents violate the multiplication bound preconditions."""


class DegenerateFitError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class NoConvergenceError(NumericalError):
    pass


class SingularityError(NumericalError):
    pass


class PoleExtrapolationError(NumericalError):
    pass


class NonCauchyError(NumericalError):
    pass


class StationaryPointError(NumericalError):
    pass
