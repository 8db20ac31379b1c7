"""Complex geometric phases and quasi-energy spectra of cycled
gain-loss-balanced two-band lattices.

The package follows the pipeline of the underlying physics: ``models``
defines the two-level Bloch Hamiltonians and their lattice parents,
``spectral`` solves the instantaneous eigenproblem, ``berry`` integrates
the biorthogonal connection into complex geometric phases, ``floquet``
turns slow cycling into quasi-energies, ``wannier_stark`` maps the same
data onto the tilted-lattice ladder, and ``lattice_dynamics`` propagates
wave packets on the finite chain.  ``sweep`` and ``cli`` wrap parameter
scans and the command-line entry point.
"""

from .errors import (
    BoundaryReachError,
    ConfigError,
    ConsistencyError,
    DegenerateFloquetError,
    ExceptionalPointError,
    HorizonError,
    IntegrationError,
    InvalidModelError,
    NearCriticalError,
    ParameterError,
    PTCycleError,
    SymmetryError,
)
from .models import (
    LatticeHoppings,
    TwoLevelModel,
    bloch_from_hoppings,
    builtin_example,
    builtin_lattice,
    hamiltonian_at,
    lattice_from_descriptor,
    parse_model_descriptor,
)
from .spectral import EigenSystem, critical_lambda, eigensystem, energies
from .berry import BerryResult, berry_connection, berry_phase
from .floquet import (
    IntegratorStats,
    QuasiEnergyResult,
    adiabatic_quasi_energy,
    exact_example1,
    monodromy,
    quasi_energies,
)
from .wannier_stark import (
    WSEigenstate,
    WSLadder,
    central_third,
    classify_transition,
    ladder_residuals,
    write_eigenstate_csv,
    write_spectrum_csv,
    ws_eigenstate,
    ws_oracle,
    ws_spectrum,
)
from .lattice_dynamics import (
    PeriodicityReport,
    Trajectory,
    energy_expectation,
    evolve,
    growth_rate,
    periodicity_report,
    single_site_initial,
    transient_estimate,
    write_report_json,
    write_trajectory_csv,
)
from .sweep import SweepConfig, SweepOutcome, fig_preset, load_config, run_sweep
from ._version import __version__

__all__ = [
    "PTCycleError",
    "InvalidModelError",
    "SymmetryError",
    "ExceptionalPointError",
    "NearCriticalError",
    "IntegrationError",
    "DegenerateFloquetError",
    "ConsistencyError",
    "BoundaryReachError",
    "HorizonError",
    "ParameterError",
    "ConfigError",
    "TwoLevelModel",
    "LatticeHoppings",
    "builtin_example",
    "builtin_lattice",
    "lattice_from_descriptor",
    "bloch_from_hoppings",
    "parse_model_descriptor",
    "hamiltonian_at",
    "EigenSystem",
    "energies",
    "eigensystem",
    "critical_lambda",
    "BerryResult",
    "berry_connection",
    "berry_phase",
    "IntegratorStats",
    "QuasiEnergyResult",
    "monodromy",
    "quasi_energies",
    "adiabatic_quasi_energy",
    "exact_example1",
    "WSLadder",
    "WSEigenstate",
    "ws_spectrum",
    "ws_eigenstate",
    "ws_oracle",
    "classify_transition",
    "ladder_residuals",
    "central_third",
    "write_spectrum_csv",
    "write_eigenstate_csv",
    "Trajectory",
    "PeriodicityReport",
    "single_site_initial",
    "transient_estimate",
    "evolve",
    "growth_rate",
    "energy_expectation",
    "periodicity_report",
    "write_trajectory_csv",
    "write_report_json",
    "SweepConfig",
    "SweepOutcome",
    "fig_preset",
    "load_config",
    "run_sweep",
    "__version__",
]
