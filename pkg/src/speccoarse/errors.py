"""Exception types raised across the package."""


class SpecCoarseError(Exception):
    """Base class for all package errors."""


class ValidationError(SpecCoarseError, ValueError):
    """Input violates a documented precondition."""


class DimensionMismatch(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class ChannelMismatch(ValidationError):
    pass


class IsolatedVertex(ValidationError):
    def __init__(self, vertex):
        self.vertex = int(vertex)
        super().__init__(f"vertex {self.vertex} has zero degree")


class NonpositiveVertexWeight(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class DegenerateSubset(ValidationError):
    pass


class TargetTooSmall(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


class NonpositiveBaseline(ValidationError):
    pass


class NonOrthonormalU(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class SchemeMismatch(ValidationError):
    pass


class TooSmall(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class NoConvergence(SpecCoarseError, RuntimeError):
    pass


class ResampleExhausted(SpecCoarseError, RuntimeError):
    pass


class GenerationFailed(SpecCoarseError, RuntimeError):
    pass
