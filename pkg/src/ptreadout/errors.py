"""Exception hierarchy shared by all engine modules.

Two families matter to callers: bad inputs (``ValidationError``, CLI exit
code 1) and failures of the numerics themselves (``NumericalError``, CLI
exit code 2).
"""


class ValidationError(ValueError):
    """Invalid parameters, configuration, or precondition violation."""


class GridMismatchError(ValidationError):
    """Two traces that must share a probe grid do not."""


class LabelMismatchError(ValidationError):
    """Two spectra that must share a mode-label set do not."""


class GridTooCoarseError(ValidationError):
    """Probe grid cannot resolve a spectral feature (peak spans < 5 points)."""


class LadderTooCoarseError(ValidationError):
    """Perturbation ladder has too few points or too little dynamic range."""


class StepSizeError(ValidationError):
    """Requested integrator step exceeds the stability-safe bound."""


class NotSteadyStateSolvableError(ValidationError):
    """Time-domain cross-check requested for a marginal or unstable system."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its accuracy contract."""


class SingularSelfEnergyError(NumericalError):
    """Self-energy denominator collapsed below 1e-300 at a probe frequency."""

    def __init__(self, omega: float, where: str):
        self.omega = omega
        self.where = where
        super().__init__(
            f"self-energy denominator ({where}) is singular at omega={omega!r}"
        )


class RootPolishError(NumericalError):
    """A polynomial root failed its residual tolerance after refinement."""


class DivergenceError(NumericalError):
    """Mode amplitudes exceeded the divergence guard (unstable system)."""
