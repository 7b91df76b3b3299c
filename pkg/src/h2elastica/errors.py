"""Exception types raised across the package."""


class H2ElasticaError(Exception):
    """Base class for all package errors."""


class NonImmersedError(H2ElasticaError, ValueError):
    """The curve's speed drops to (or below) the immersion floor."""

    def __init__(self, min_speed, floor):
        super().__init__(f"curve is not immersed: min speed {min_speed:.3e} <= floor {floor:.1e}")
        self.min_speed = min_speed
        self.floor = floor


class ShapeMismatchError(H2ElasticaError, ValueError):
    """A field or sample array does not match the owning curve's grid."""


class FactorizationError(H2ElasticaError):
    """Cholesky factorization of the H^2(ds) Gram matrix failed."""


class SingularGramianError(H2ElasticaError):
    """The controllability Gramian has (numerically) vanishing smallest eigenvalue."""


class FrameDriftError(H2ElasticaError):
    """The integrated normal frame lost orthonormality beyond tolerance."""


class NonZeroMeanError(H2ElasticaError, ValueError):
    """A zero-mean input was required."""


class StepFailure(H2ElasticaError):
    """Time stepping could not proceed (dt underflow, blow-up, immersion loss)."""

    def __init__(self, message, dt=None, trajectory=None):
        super().__init__(message)
        self.dt = dt
        self.trajectory = trajectory


class InsufficientTailError(H2ElasticaError):
    """Too few trajectory records fall inside the Lojasiewicz fit window."""


class CurveFormatError(H2ElasticaError, ValueError):
    """A curve document could not be parsed."""
