"""Exception types shared across the library."""


class DecosimError(Exception):
    """Base class for library errors."""


class DomainError(DecosimError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(DecosimError, ValueError):
    """A lookup fell outside tabulated data."""


class QuadratureError(DecosimError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the integrator's error estimate in ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class CausticError(DecosimError, ArithmeticError):
    """The Gaussian propagator is degenerate at the requested horizon.

    For the free oscillator this happens at sin(Omega t) = 0, where the
    propagator coefficients genuinely diverge.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class SolverError(DecosimError, ArithmeticError):
    """An ODE / BVP solver did not converge to tolerance."""


class ResolutionError(DecosimError, ValueError):
    """A grid is too coarse for the requested operation.

    ``measured`` holds the observed drift / aliasing figure.
    """

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class StepSizeError(DecosimError, ArithmeticError):
    """Explicit time stepping went unstable (norm blow-up)."""


class InvalidModelError(DecosimError, ValueError):
    """A model object violates its own invariants (e.g. |S| > 1)."""


class CodeConstructionError(DecosimError, ValueError):
    """A stabilizer code failed verification at construction time."""


class RecoveryTableError(DecosimError, KeyError):
    """A syndrome with no recovery entry carried nonzero weight."""


class CircuitSynthesisError(DecosimError, ArithmeticError):
    """Encoding/decoding circuit synthesis failed verification."""


class ConfigError(DecosimError, ValueError):
    """An experiment configuration failed validation.

    ``path`` is the offending key path, e.g. ``"bath.temperature"``.
    """

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
