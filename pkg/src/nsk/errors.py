"""Exception types shared across the package."""


class NskError(Exception):
    """Base class for all package errors."""


class InvalidGrid(NskError):
    """Grid parameters violate n in {1,2,3}, even N >= 8, or L > 0."""


class ShapeMismatch(NskError):
    """Physical or spectral array does not match the grid layout."""


class InvalidCutoff(NskError):
    """Cutoff radii violate 0 < r1 < r_inf <= pi*N/L."""


class SupportViolation(NskError):
    """State carries low-frequency mass where none is allowed."""


class InvalidPressure(NskError):
    """Pressure model violates the critical condition P'(1) = 0."""


class VacuumApproach(NskError):
    """Density 1 + phi dropped to or below the configured floor."""


class AmplitudeTooLarge(NskError):
    """Field amplitude outside the validity range of a Taylor branch."""


class NonFinite(NskError):
    """A computed spectral coefficient is NaN or infinite."""


class Blowup(NskError):
    """Trajectory norm exceeded the blowup threshold."""


class StabilityGuard(NskError):
    """Explicit integrator step size violates its stability bound."""


class InsufficientWindow(NskError):
    """Decay-fit window holds too few samples or starts too early."""


class QuadratureFailure(NskError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class ConfigError(NskError):
    """Experiment configuration is malformed or inconsistent."""
