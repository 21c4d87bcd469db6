"""Exception types shared across the package."""


class OptospringError(Exception):
    """Base class for all domain errors raised by this package."""


class SingularPointError(OptospringError, ValueError):
    """A response function diverges at the requested (real) frequency.

    Raised when an evaluation lands exactly on a pole: an undamped
    oscillator driven on resonance, or an effective susceptibility whose
    inverse vanishes (the system sits on a stability boundary).
    """


class StabilityBoundaryError(SingularPointError):
    """The working point sits exactly on the static stability boundary."""


class DegenerateDissipationError(OptospringError, ValueError):
    """An operation that requires mechanical dissipation got damping = 0."""


class NoMeasurementError(OptospringError, ValueError):
    """Equivalent input noise requested with zero optomechanical coupling."""


class NoDipFoundError(OptospringError, ValueError):
    """Dip analysis found no sensitivity dip on the supplied grid."""


class ConvergenceError(OptospringError, RuntimeError):
    """A numeric search terminated without meeting its convergence test."""


class ConfigError(OptospringError, ValueError):
    """A run configuration failed validation."""
