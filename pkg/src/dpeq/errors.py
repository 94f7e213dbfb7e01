"""Exception types raised by the library."""


class DpeqError(Exception):
    """Base class for all library errors."""


class ValidationError(DpeqError):
    """A game or profile violates a structural invariant."""


class BoundViolation(ValidationError):
    """Utility entry outside [-1, 1]."""


class MissingMatrix(ValidationError):
    """An edge lacks one of its two directed utility matrices."""


class ShapeMismatch(ValidationError):
    """A utility matrix has the wrong shape for its edge."""


class IsolatedPlayer(ValidationError):
    """A player has no neighbors; the degree-normalized gradient is undefined."""


class ZeroSumViolation(ValidationError):
    """Zero-sum flag set but U[j,i] != -U[i,j]^T on some edge."""


class NeighborCountMismatch(DpeqError):
    """Number of received strategy vectors differs from the player's degree."""


class EmptyTrace(DpeqError):
    """A trace with zero recorded rounds cannot be summarized."""


class NonFiniteInput(DpeqError):
    """Input vector contains NaN or infinity."""


class DimMismatch(DpeqError):
    """Vector dimensions disagree."""


class NonPositiveEta(DpeqError):
    """Step size must be strictly positive."""


class TooFewPlayers(DpeqError):
    """The tau schedule needs N >= 2 so that log N > 0."""


class NotAdjacent(DpeqError):
    """Games differ structurally or on more than one undirected edge."""


class DegenerateSchedule(DpeqError):
    """Hyperparameter schedule inputs produce a non-finite or nonpositive plan."""


class EdgeNotInGame(DpeqError):
    """Requested edge is not part of the game's edge set."""


class ZeroSigma(DpeqError):
    """Operation undefined without noise (sigma = 0)."""


class TraceMismatch(DpeqError):
    """Coupled traces disagree in shape, length, or action sets."""


class InvalidAlpha(DpeqError):
    """Renyi order must satisfy alpha > 1 (or be +inf)."""


class InvalidDelta(DpeqError):
    """delta must lie in (0, 1)."""


class FixtureTooLarge(DpeqError):
    """Chain fixture limited to N <= 16 so epsilon_i stays meaningful."""
