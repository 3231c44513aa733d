"""Exception hierarchy shared by all steerkit modules."""


class SteerkitError(Exception):
    """Base class for library errors."""


class DimensionMismatchError(SteerkitError, ValueError):
    """Two vectors (or a vector and a state) disagree in dimension."""


class InvariantError(SteerkitError, ValueError):
    """Input violates a type invariant (normalization, ordering, unitarity)."""


class ZeroProbabilityError(SteerkitError, ValueError):
    """The requested outcome has zero probability on the given state."""


class OffSupportError(SteerkitError, ValueError):
    """A state carries weight on Schmidt components with zero coefficient."""
