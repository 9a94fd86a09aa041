"""Exception hierarchy shared by all modules."""


class GeometryError(ValueError):
    """Base class for every error raised by the toolkit."""


class ParameterError(GeometryError):
    """Construction parameters violate a stated precondition."""


class DomainError(GeometryError):
    """An argument lies outside the admissible domain of an operation."""


class GuardMarginError(DomainError):
    """Evaluation requested too close to a coordinate singularity."""


class NonPositiveWarpError(DomainError):
    """A warping function is not strictly positive where it must be."""


class SingularMetricError(GeometryError):
    """A metric matrix is not invertible to the conditioning threshold."""


class CollarMismatchError(GeometryError):
    """Two pieces fail to agree as products on a declared collar."""

    def __init__(self, message, deviation=None, location=None):
        super().__init__(message)
        self.deviation = deviation
        self.location = location


class EndpointMismatchError(GeometryError):
    """Two metric paths cannot be concatenated."""


class ClassificationError(GeometryError):
    """A critical point could not be classified."""


class NotCriticalError(ClassificationError):
    """The gradient does not vanish at the requested point."""


class UnclassifiableError(ClassificationError):
    """Degeneracy of a type outside Morse / birth-death / fold / cusp."""


class NonTransverseError(ClassificationError):
    """A degenerate family point whose unfolding is not transverse."""


class FlowError(GeometryError):
    """The trajectory integrator failed (step collapse)."""


class NonStandardMetricError(GeometryError):
    """The boundary metric is not in standard form near the surgery sphere."""


class HypothesisWarning(UserWarning):
    """A metric was built outside the hypotheses under which it is certified."""
