"""Exception hierarchy shared across the package."""


class NeuroFieldError(Exception):
    """Base class for all errors raised by neurofield."""


class GridMismatchError(NeuroFieldError, ValueError):
    """Two fields with different grids were combined."""


class SamplingError(NeuroFieldError, ValueError):
    """A sampled function returned a non-finite value."""


class MultiplierError(NeuroFieldError, ValueError):
    """A Fourier multiplier is not finite at a represented frequency."""


class InvalidParamsError(NeuroFieldError, ValueError):
    """Kernel parameters violate the standing assumptions."""


class DomainError(NeuroFieldError, ValueError):
    """An argument lies outside the domain where a formula is valid."""


class NearPoleError(NeuroFieldError, ArithmeticError):
    """Evaluation point is numerically on a pole."""


class ContractionError(NeuroFieldError, ValueError):
    """The coupling strength is too large for the fixed-point map to contract."""


class ConvergenceError(NeuroFieldError, RuntimeError):
    """An iteration hit its cap or stagnated.

    ``report`` and ``best`` carry the diagnostics and best iterate found.
    """

    def __init__(self, message, report=None, best=None):
        super().__init__(message)
        self.report = report
        self.best = best


class BlowUpError(NeuroFieldError, FloatingPointError):
    """Time integration produced a non-finite state."""

    def __init__(self, message, t_last):
        super().__init__(message)
        self.t_last = t_last


class StructuralError(NeuroFieldError, RuntimeError):
    """A certified zero bracket lacks the expected sign change."""


class UnsupportedElementError(NeuroFieldError, ValueError):
    """A group element does not map grid nodes onto grid nodes."""


class HorizonError(NeuroFieldError, ValueError):
    """Control horizon exceeds the admissible small-time bound."""
