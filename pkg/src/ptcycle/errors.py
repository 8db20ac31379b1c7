"""Exception types shared across the package."""

from __future__ import annotations


class PTCycleError(Exception):
    """Base class for every error raised by this package."""


class InvalidModelError(PTCycleError):
    """A model description is malformed or violates a structural requirement."""


class SymmetryError(InvalidModelError):
    """Hopping amplitudes break the required gain-loss symmetry.

    Carries the worst offending offset and the residual so callers can point
    at the broken coefficient instead of guessing.
    """

    def __init__(self, message: str, offset: int | None = None, residual: float | None = None):
        super().__init__(message)
        self.offset = offset
        self.residual = residual


class ExceptionalPointError(PTCycleError):
    """The instantaneous Hamiltonian is defective (or numerically close to it)."""

    def __init__(self, message: str, k: float | None = None, defect: float | None = None):
        super().__init__(message)
        self.k = k
        self.defect = defect


class NearCriticalError(PTCycleError):
    """Adiabatic quantities are refused inside the critical window.

    The geometric phase diverges at the transition point, so any result
    produced there would be noise dressed up as a number.
    """

    def __init__(self, message: str, lam: float | None = None, lam_critical: float | None = None):
        super().__init__(message)
        self.lam = lam
        self.lam_critical = lam_critical


class IntegrationError(PTCycleError):
    """The ODE integration failed (step cap, step underflow or solver error)."""

    def __init__(self, message: str, t_reached: float | None = None):
        super().__init__(message)
        self.t_reached = t_reached


class DegenerateFloquetError(PTCycleError):
    """The one-cycle propagator has (numerically) coincident eigenvalues."""


class ConsistencyError(PTCycleError):
    """A cross-check that should hold by construction failed.

    Typical cause: requesting an eigenstate on the wrong branch, or an
    integration whose boundary condition residual is far above tolerance.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class BoundaryReachError(PTCycleError):
    """The evolving wavepacket reached the edge of the finite chain."""

    def __init__(self, message: str, t: float | None = None, tail: float | None = None):
        super().__init__(message)
        self.t = t
        self.tail = tail


class HorizonError(PTCycleError):
    """The requested analysis needs a longer time trace than was provided."""


class ParameterError(PTCycleError):
    """A scalar parameter is outside the regime the routine supports."""


class ConfigError(PTCycleError):
    """A sweep configuration file or dictionary was rejected."""
