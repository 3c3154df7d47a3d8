"""Exception types raised across the package."""


class WVTuneError(Exception):
    """Base class for every error raised by wvtune."""


class ParameterError(WVTuneError, ValueError):
    """An argument is outside its admissible range."""


class NotPositiveDefiniteError(WVTuneError, ValueError):
    """A matrix that must be symmetric positive definite is not."""

    def __init__(self, message, role=None):
        super().__init__(message)
        self.role = role


class DegenerateError(WVTuneError, ValueError):
    """A direction or projector is undefined (e.g. coincident class means)."""


class ConstantClassifierError(DegenerateError):
    """The weight vector is zero, so the rule ignores its input."""


class ConvergenceError(WVTuneError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``last`` carries the final iterate and ``residual`` the final
    convergence measure so callers can inspect how far off it was.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class ConfigError(WVTuneError, ValueError):
    """Experiment configuration is missing fields or inconsistent."""
