"""Exception hierarchy shared by all modules."""


class DuctModesError(Exception):
    """Base class for every error raised by the package."""


class RangeExceededError(DuctModesError, ValueError):
    """Argument outside the supported evaluation range."""


class PoleError(DuctModesError, ArithmeticError):
    """Dispersion ratio evaluated at (or numerically on) a pole of J'_m/J_m."""


class ConvergenceError(DuctModesError, RuntimeError):
    """An iterative solver did not converge within its budget."""


class CompletenessError(ConvergenceError):
    """Argument-principle root count disagrees with the roots found."""


class StepCollapseError(ConvergenceError):
    """Continuation step size collapsed below its floor."""


class TrackingError(ConvergenceError):
    """A tracked path passes too close to a branch point."""


class TripleRootError(DuctModesError, ArithmeticError):
    """Second derivative vanishes at a candidate double root."""


class OutOfDiskError(DuctModesError, ValueError):
    """Local expansion requested outside its validity disk."""


class IllConditionedError(DuctModesError, ArithmeticError):
    """Linear system too ill-conditioned to trust."""


class ConfigError(DuctModesError, ValueError):
    """Invalid run configuration."""
