class RoabpError(Exception):
    """Base class for every error raised by structured_roabp."""


class InvalidParameterError(RoabpError, ValueError):
    """A construction or command received parameters outside its domain."""


class DuplicateNodesError(InvalidParameterError):
    """Interpolation nodes are not pairwise distinct."""


class DimensionMismatchError(RoabpError, ValueError):
    """Shapes, lengths or variable counts disagree."""


class NonCommutingError(RoabpError, ValueError):
    """Matrices that must commute do not."""


class GuardExceededError(RoabpError, ValueError):
    """A configured size guard would be exceeded."""


class NotInRingError(RoabpError):
    """A matrix lies outside the span of the normal-set matrices."""


class RingClosureError(RoabpError):
    """The normal-set closure did not terminate within its degree cap."""


class EigenConvergenceError(RoabpError):
    """An eigen-decomposition failed or produced an unacceptable residual."""


class VarietyError(RoabpError):
    """Variety points could not be separated and verified."""


class DualSpaceError(RoabpError):
    """A local dual space could not be computed."""


class MultiplicityMismatchError(DualSpaceError):
    """Local dual dimensions do not add up to the size of the normal set."""


class SingularDualBasisError(DualSpaceError):
    """The operator-evaluation matrix is numerically singular."""


class DecompositionError(RoabpError):
    """A Waring decomposition does not expand to its target."""


class PlanError(RoabpError):
    """An evaluation plan cannot be built for the requested operator."""
