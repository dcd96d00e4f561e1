"""Exception types shared across the solver modules."""


class QubitAgingError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDenominator(QubitAgingError):
    """Steady-coherence denominator is numerically singular."""


class NoFixedPoint(QubitAgingError):
    """The steady-state equation degenerates to 0 = const with no root."""


class NonFinite(QubitAgingError):
    """Integration produced NaN or infinity (solver blow-up)."""


class DimensionMismatch(QubitAgingError):
    """State dimensions do not match the parameter set."""


class NonIntegerSplit(QubitAgingError):
    """N*p is not an integer; the caller must round explicitly first."""


class TooLarge(QubitAgingError):
    """Qubit count exceeds the dense-solver dimension guard."""


class NonPhysical(QubitAgingError):
    """Density-matrix invariants (trace/Hermiticity/positivity) broke."""


class RequiresZeroV(QubitAgingError):
    """The correlated-moment equations are only implemented for V = 0."""


class NoBistability(QubitAgingError):
    """The discriminant never goes negative on p in [0, 1]."""
