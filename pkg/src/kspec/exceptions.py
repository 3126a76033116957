"""Exception types shared across the package."""


class KspecError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(KspecError):
    """Operands have incompatible shapes."""


class InsufficientSamplesError(KspecError):
    """Too few sample columns for the requested operation."""


class DegeneratePairError(KspecError):
    """A pair of identical sample columns was encountered."""


class AllPairsDegenerateError(KspecError):
    """Every sample pair is degenerate; nothing to average."""


class NotSymmetricError(KspecError):
    """Matrix is not symmetric within tolerance."""


class NotPSDError(KspecError):
    """Matrix has an eigenvalue below the negative tolerance."""


class IndefiniteBeyondToleranceError(NotPSDError):
    """Matrix is indefinite beyond the PSD clamping tolerance."""


class ConvergenceFailureError(KspecError):
    """An iterative numerical routine failed to converge."""


class NoConvergenceError(ConvergenceFailureError):
    """Fixed-point iteration exhausted its iteration budget."""


class LeftUniquenessSetError(KspecError):
    """Fixed-point iterate left the uniqueness region of the equation."""


class NotUpperHalfPlaneError(KspecError):
    """Argument z must satisfy Im z > 0."""


class EmptyGridError(KspecError):
    """An evaluation grid must contain at least one point."""


class GridDoesNotCoverSupportError(KspecError):
    """A density grid does not cover the required support interval."""


class AllZeroSpectrumError(KspecError):
    """All population eigenvalues are zero."""
