"""Exception hierarchy shared by every module."""


class FluxTorqueError(Exception):
    """Base class for all errors raised by the engine."""


class ConfigurationError(FluxTorqueError, ValueError):
    """Invalid model parameters or job configuration.

    ``field`` carries the dotted path of the offending entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ResonanceSingularityError(FluxTorqueError, ArithmeticError):
    """Polarizability evaluated at (or numerically at) the lossless pole eps = -2."""


class DegenerateModeError(FluxTorqueError, ArithmeticError):
    """Two bulk eigenmodes of the substrate coincide; the field basis is rank deficient."""

    def __init__(self, message, omega=None, k_par=None, phi=None):
        self.omega, self.k_par, self.phi = omega, k_par, phi
        super().__init__(f"{message} (omega={omega!r}, k_par={k_par!r}, phi={phi!r})")


class BoundarySolveError(FluxTorqueError, ArithmeticError):
    """Interface boundary-condition system is singular or its residual is too large."""


class LightLineError(FluxTorqueError, ArithmeticError):
    """k_z = 0 exactly: the 1/k_z Green's function prefactor is undefined."""


class UndefinedSpinError(FluxTorqueError, ArithmeticError):
    """Photon-number weight vanishes, so the spin per photon is undefined."""


class QuadratureError(FluxTorqueError, ArithmeticError):
    """Adaptive integration hit its subdivision limit before reaching tolerance.

    The partial result and its error estimate are attached.
    """

    def __init__(self, message, value=None, error=None):
        self.value, self.error = value, error
        super().__init__(message)


class TailDominatedError(QuadratureError):
    """Frequency window does not cover the support of the spectral density."""


class UnboundedSpinError(FluxTorqueError, ArithmeticError):
    """Steady-state spin requested with zero rotational damping."""


class StabilityError(FluxTorqueError, ValueError):
    """Langevin time step too large relative to the relaxation time."""
