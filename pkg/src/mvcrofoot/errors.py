"""Exception types shared across the package."""


class MvcrofootError(Exception):
    """Base class for all package-specific errors."""


class NotUnitaryError(MvcrofootError):
    """A matrix that must be unitary fails the unitarity check."""


class NotPureError(MvcrofootError):
    """An inner function has ||Theta(0)|| too close to 1."""


class FactorInvalidError(MvcrofootError):
    """A Blaschke-Potapov factor violates its invariants."""


class SingularResolventError(MvcrofootError):
    """(I - zA) is numerically singular at the requested point."""


class GenerationFailedError(MvcrofootError):
    """Random instance generation exhausted its retry budget."""


class OutOfDiskError(MvcrofootError):
    """A point that must lie in the open unit disk does not."""


class NotStrictError(MvcrofootError):
    """A contraction is not strict (operator norm too close to 1)."""


class FeedbackSingularError(MvcrofootError):
    """The feedback coupling matrix is numerically singular."""


class PurityViolationError(MvcrofootError):
    """Construction-time validation of a transformed inner function broke down."""


class DimensionMismatchError(MvcrofootError):
    """Operands live on incompatible spaces."""


class GridMismatchError(MvcrofootError):
    """Sample buffers come from different boundary grids."""


class GridTooCoarseError(MvcrofootError):
    """The quadrature grid cannot resolve the requested integrand."""


class IllConditionedError(MvcrofootError):
    """A Gram system is too ill-conditioned to trust."""


class NotInvolutiveError(MvcrofootError):
    """The candidate conjugation is not an involution."""


class NotInKThetaError(MvcrofootError):
    """A conjugated function failed to land back in the model space."""


class IncompatibleInputsError(MvcrofootError):
    """Inputs violate the symmetry hypotheses required by the operation."""
