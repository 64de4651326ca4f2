"""Exception hierarchy shared by all modules."""


class RiccatiFlowError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(RiccatiFlowError, ValueError):
    """Operand shapes do not fit together."""


class SingularityError(RiccatiFlowError):
    """A matrix that must be inverted is (numerically) singular."""


class BranchCutError(RiccatiFlowError):
    """No admissible branch cut could be found for a logarithm."""


class NotInClassError(RiccatiFlowError):
    """A pair cannot be normalized within the requested pair class."""


class NotRegularError(RiccatiFlowError):
    """The pencil det(M - lambda L) vanishes identically."""


class IndexTooHighError(RiccatiFlowError):
    """The infinite eigenvalues of the pencil are not semisimple."""


class NumericalBreakdown(RiccatiFlowError):
    """A step that is well defined in exact arithmetic failed numerically."""


class BreakdownError(NumericalBreakdown):
    """A doubling step hit a (near) singular matrix.

    Parameters
    ----------
    message : str
    sigma_min : float
        Smallest singular value of the offending matrix.
    """

    def __init__(self, message, sigma_min=0.0):
        super().__init__(message)
        self.sigma_min = float(sigma_min)


class UsageError(RiccatiFlowError, ValueError):
    """Arguments are individually valid but inconsistent with each other."""


class SpecError(RiccatiFlowError, ValueError):
    """A Jordan block description violates its invariants."""


class HypothesisError(RiccatiFlowError):
    """An invertibility hypothesis of an asymptotic formula fails."""


class AssumptionError(HypothesisError):
    """The initial state is not generic enough for the general limit formula."""


class PoleError(RiccatiFlowError):
    """The periodic orbit is evaluated exactly at one of its poles."""
