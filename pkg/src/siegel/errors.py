"""Exception types shared across the package."""


class SiegelError(Exception):
    """Base class for all package errors."""


class RationalInputError(SiegelError):
    """Continued-fraction expansion terminated before the requested length."""


class InvalidLiftError(SiegelError):
    """A circle-map lift failed its periodicity or monotonicity checks."""


class BracketError(SiegelError):
    """Calibration target lies outside the rotation numbers achieved by the family."""


class BudgetExhaustedError(SiegelError):
    """Iteration budget ran out before the requested tolerance was certified."""


class SolverFailureError(SiegelError):
    """Newton solve failed from every start; carries the best residual seen."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class PoleError(SiegelError):
    """Evaluation point too close to a pole of the rational map."""


class BranchError(SiegelError):
    """Log-branch tracking failed in an escape-coordinate computation."""


class ExtensionError(SiegelError):
    """Barycentric disk-extension Newton iteration failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InversionError(SiegelError):
    """Numerical inversion of a constructed map failed; never silently ignored."""


class SampleError(SiegelError):
    """A finite-difference sample degenerated (e.g. |mu| >= 1)."""


class WindingError(SiegelError):
    """Winding-number computation rejected its input samples."""
