"""Real-time dynamics on the dc-driven two-band chain.

The ladder solvers in :mod:`.wannier_stark` characterize the driven lattice
through its spectrum; this module integrates the underlying tight-binding
equations

    i da_n/dt = sum_l rho_{n-l} a_l + sum_l sigma_{n-l} b_l - F n a_n
    i db_n/dt = sum_l theta_{n-l} a_l + sum_l eta_{n-l} b_l - F n b_n

directly in the time domain.  Snapshots are renormalized as they are stored
and the removed norm accumulates in a running log, so growing solutions never
overflow doubles; the physical amplitude at any stored time is
``state * exp(norm_log)``.

Periodicity analysis runs on the stored snapshots.  The primary probe is the
Bloch-period fidelity |<s(t)|s(t+T1)>| with T1 = 2*pi/F: once the decaying
ladder has died out, a single-ladder wavepacket reconstructs itself every T1.
While both ladders survive, their energy offset 2*Re(Theta) beats through the
sublattice coherence sum_n a_n*conj(b_n), and the autocorrelation of that
series exposes the second period T2 = pi/Re(Theta).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
import scipy.sparse
from scipy.integrate import solve_ivp
from scipy.signal import find_peaks

from .errors import BoundaryReachError, HorizonError, IntegrationError, ParameterError
from .models import LatticeHoppings
from .wannier_stark import _dense_ws_matrix

__all__ = [
    "Trajectory",
    "PeriodicityReport",
    "single_site_initial",
    "evolve",
    "growth_rate",
    "energy_expectation",
    "periodicity_report",
    "write_trajectory_csv",
    "write_report_json",
]

_ODE_RTOL = 3e-12
_ODE_ATOL = 1e-14
_EDGE_TOL = 1e-8
_FIDELITY_THRESHOLD = 0.999
_THETA_IMAG_FLOOR = 1e-9
_PEAK_PROMINENCE = 0.1


@dataclass(frozen=True)
class Trajectory:
    """Normalized snapshots of a finite-chain evolution.

    ``states[i]`` is the unit-norm amplitude vector at ``times[i]`` with the
    A sublattice in the first half and B in the second half; ``norm_log[i]``
    is the accumulated natural log of every factor removed up to that time,
    so ``states[i] * exp(norm_log[i])`` restores the raw amplitudes.
    """

    times: np.ndarray = field(repr=False, compare=False)
    states: np.ndarray = field(repr=False, compare=False)
    norm_log: np.ndarray = field(repr=False, compare=False)

    @property
    def n_cells(self) -> int:
        return self.states.shape[1] // 2

    def cell_index(self) -> np.ndarray:
        """Centered cell labels, matching the dense ladder solver layout."""
        return np.arange(self.n_cells) - self.n_cells // 2


@dataclass(frozen=True)
class PeriodicityReport:
    """Outcome of the stored-trajectory periodicity analysis.

    ``detected_periods`` lists refined autocorrelation peak lags of the
    sublattice coherence, ordered by prominence.  ``secondary_period`` is the
    most prominent lag that is not a Bloch-period multiple, and
    ``secondary_deviation`` its relative distance from the two-ladder beat
    period pi/Re(Theta).  ``vector_period`` is set when the raw overlap phase
    makes the unnormalized state strictly periodic at a small multiple of T1
    (half-rung-shifted ladders give 2*T1).
    """

    classification: str
    t1_period: float
    t2_period: float
    transient: float
    min_fidelity: float
    overlap_phase: float | None
    vector_period: float | None
    detected_periods: tuple
    secondary_period: float | None
    secondary_deviation: float | None
    fidelity_times: np.ndarray = field(repr=False, compare=False)
    fidelity: np.ndarray = field(repr=False, compare=False)


def single_site_initial(n_cells: int = 400, sublattice: str = "A", cell: int = 0) -> np.ndarray:
    """Unit excitation of one sublattice site near the chain center.

    ``cell`` counts from the central cell with the same centered labels as
    :meth:`Trajectory.cell_index`.
    """
    if n_cells < 8 or n_cells % 2:
        raise ParameterError("chain needs an even cell count of at least 8")
    if sublattice not in ("A", "B"):
        raise ParameterError(f"unknown sublattice {sublattice!r}")
    slot = n_cells // 2 + cell
    if not 0 <= slot < n_cells:
        raise ParameterError(f"cell {cell} falls outside the chain")
    state = np.zeros(2 * n_cells, dtype=complex)
    state[slot if sublattice == "A" else n_cells + slot] = 1.0
    return state


def _edge_amplitude(state: np.ndarray, n_cells: int) -> float:
    return float(
        max(abs(state[0]), abs(state[n_cells - 1]), abs(state[n_cells]), abs(state[-1]))
    )


def evolve(
    hoppings: LatticeHoppings,
    lam: float,
    force: float,
    initial: Sequence[complex],
    t_max: float,
    dt_store: float,
    rtol: float = _ODE_RTOL,
    atol: float = _ODE_ATOL,
) -> Trajectory:
    """Integrate the tilted chain and store renormalized snapshots.

    The solver advances one ``dt_store`` segment at a time with adaptive
    RK45, removes the norm of each arriving snapshot into ``norm_log`` and
    raises :class:`BoundaryReachError` as soon as the normalized amplitude at
    either outermost cell exceeds 1e-8.  ``t_max`` must be a whole number of
    store steps so the grid stays exact.
    """
    y = np.asarray(initial, dtype=complex).ravel()
    if y.size < 16 or y.size % 2:
        raise ParameterError("initial state needs an even length of at least 16")
    if not np.all(np.isfinite(y)):
        raise ParameterError("initial state contains non-finite amplitudes")
    norm0 = float(np.linalg.norm(y))
    if norm0 == 0.0:
        raise ParameterError("initial state is identically zero")
    if not (math.isfinite(lam) and math.isfinite(force)):
        raise ParameterError("lambda and force must be finite")
    if not (t_max > 0.0 and dt_store > 0.0):
        raise ParameterError("t_max and dt_store must be positive")
    n_store = int(round(t_max / dt_store))
    if n_store < 1 or abs(n_store * dt_store - t_max) > 1e-9 * max(1.0, t_max):
        raise ParameterError("t_max must be a whole number of dt_store steps")

    n_cells = y.size // 2
    y = y / norm0
    if _edge_amplitude(y, n_cells) > _EDGE_TOL:
        raise ParameterError("initial state touches the chain edge; enlarge the chain")

    dense, _ = _dense_ws_matrix(hoppings, lam, force, n_cells)
    matrix = scipy.sparse.csr_matrix(dense)

    def rhs(_t: float, vec: np.ndarray) -> np.ndarray:
        return -1j * (matrix @ vec)

    times = [0.0]
    states = [y.copy()]
    norm_log = [math.log(norm0)]
    acc = norm_log[0]
    for step in range(n_store):
        t0, t1 = step * dt_store, (step + 1) * dt_store
        sol = solve_ivp(rhs, (t0, t1), y, method="RK45", rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(
                f"time stepping failed near t={sol.t[-1]:.6g}: {sol.message}",
                t_reached=float(sol.t[-1]),
            )
        y = sol.y[:, -1]
        nrm = float(np.linalg.norm(y))
        if not (np.all(np.isfinite(y)) and nrm > 0.0):
            raise IntegrationError(f"amplitudes left the finite range near t={t1:.6g}",
                                   t_reached=t1)
        y = y / nrm
        acc += math.log(nrm)
        tail = _edge_amplitude(y, n_cells)
        if tail > _EDGE_TOL:
            raise BoundaryReachError(
                f"wavepacket tail {tail:.3e} reached the chain edge at t={t1:.6g}",
                t=t1,
                tail=tail,
            )
        times.append(t1)
        states.append(y.copy())
        norm_log.append(acc)
    return Trajectory(
        times=np.asarray(times),
        states=np.vstack(states),
        norm_log=np.asarray(norm_log),
    )


def growth_rate(traj: Trajectory, t_start: float = 0.0) -> float:
    """Linear-fit slope of ``norm_log`` over stored times ``>= t_start``."""
    mask = traj.times >= t_start - 1e-12
    if int(mask.sum()) < 2:
        raise ParameterError("need at least two stored snapshots beyond t_start")
    return float(np.polyfit(traj.times[mask], traj.norm_log[mask], 1)[0])


def energy_expectation(
    traj: Trajectory, hoppings: LatticeHoppings, lam: float, force: float
) -> np.ndarray:
    """Per-snapshot expectation <s|H_WS|s> of the tilted-chain Hamiltonian."""
    dense, _ = _dense_ws_matrix(hoppings, lam, force, traj.n_cells)
    return np.einsum("ij,ij->i", np.conj(traj.states), traj.states @ dense.T)


def _refined_peaks(series: np.ndarray, dt: float, prominence: float) -> list:
    """Autocorrelation peaks as (lag, prominence) with sub-sample refinement."""
    idx, props = find_peaks(series, prominence=prominence)
    out = []
    for j, i in enumerate(idx):
        shift = 0.0
        if 0 < i < len(series) - 1:
            curvature = series[i - 1] - 2.0 * series[i] + series[i + 1]
            if curvature != 0.0:
                shift = 0.5 * (series[i - 1] - series[i + 1]) / curvature
        lag = (i + shift) * dt
        if lag > 0.0:
            out.append((float(lag), float(props["prominences"][j])))
    return out


def _wrap_angle(phi: float) -> float:
    return math.remainder(phi, 2.0 * math.pi)


def transient_estimate(theta_shift: complex,
                       fidelity_threshold: float = _FIDELITY_THRESHOLD) -> float:
    """Settling time before the stroboscopic fidelity clears the threshold.

    The subdominant ladder decays relative to the dominant one at rate
    2*Im(Theta), and a residual amplitude ratio r dents the fidelity by
    about 2 r^2, so the window opens once exp(-2 Im(Theta) t) solves
    2 r^2 = 1 - threshold.  Imaginary parts below the quasi-energy noise
    floor count as no decay at all; otherwise they would suggest absurd
    waiting times for models that are Hermitian up to roundoff.
    """
    imag = abs(complex(theta_shift).imag)
    if imag <= _THETA_IMAG_FLOOR:
        return 0.0
    return math.log(2.0 / (1.0 - fidelity_threshold)) / (4.0 * imag)


def periodicity_report(
    traj: Trajectory,
    force: float,
    theta_shift: complex,
    fidelity_threshold: float = _FIDELITY_THRESHOLD,
) -> PeriodicityReport:
    """Classify a stored trajectory as Bloch-periodic or aperiodic.

    ``theta_shift`` is the ladder offset of the dominant branch (the
    ``theta_shift`` field of the matching :class:`~.wannier_stark.WSLadder`).
    Its imaginary part sets the transient length: the subdominant ladder
    decays relative to the dominant one at rate 2*Im(Theta), so the window
    opens once that contamination can no longer drag the fidelity below the
    threshold.  Raises :class:`HorizonError` when the trace is shorter than
    transient + 5*T1.
    """
    if not force > 0.0:
        raise ParameterError("periodicity analysis needs a positive force")
    if traj.times.size < 4:
        raise ParameterError("trajectory holds too few snapshots to analyze")
    steps = np.diff(traj.times)
    dt = float(steps[0])
    if dt <= 0.0 or np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise ParameterError("trajectory must be stored on a uniform time grid")
    t1 = 2.0 * math.pi / force
    shift = int(round(t1 / dt))
    if shift < 1 or abs(shift * dt - t1) > 1e-6 * t1:
        raise ParameterError("stored spacing must divide the Bloch period T1")

    theta = complex(theta_shift)
    t2 = math.pi / theta.real if theta.real != 0.0 else math.inf
    transient = transient_estimate(theta, fidelity_threshold)
    horizon = traj.times[-1]
    needed = transient + 5.0 * t1
    if horizon < needed - 1e-9:
        raise HorizonError(
            f"trajectory ends at t={horizon:.6g} but the analysis needs "
            f"t_max >= {needed:.6g} (transient {transient:.6g} plus 5 Bloch periods)"
        )

    start = int(np.searchsorted(traj.times, transient - 1e-9))
    stop = traj.times.size - shift
    states = traj.states
    overlaps = np.einsum("ij,ij->i", np.conj(states[start:stop]), states[start + shift:])
    fidelity = np.abs(overlaps)
    min_fidelity = float(fidelity.min())
    periodic = min_fidelity > fidelity_threshold

    overlap_phase: float | None = None
    vector_period: float | None = None
    if periodic:
        mean_dir = complex(np.mean(overlaps / np.abs(overlaps)))
        phase = float(np.angle(mean_dir))
        spread = float(np.max(np.abs(np.angle(overlaps * np.exp(-1j * phase)))))
        if spread < 0.05:
            overlap_phase = phase
            for mult in range(1, 5):
                if abs(_wrap_angle(mult * phase)) < 0.05:
                    vector_period = mult * t1
                    break

    # Two surviving ladders beat through the sublattice coherence at 2 Re(Theta);
    # autocorrelate that series to expose every period present in the pattern.
    n_cells = traj.n_cells
    window = states[start:]
    coherence = np.sum(window[:, :n_cells] * np.conj(window[:, n_cells:]), axis=1)
    coherence = coherence - coherence.mean()
    detected: tuple = ()
    secondary_period: float | None = None
    secondary_deviation: float | None = None
    power = float(np.vdot(coherence, coherence).real)
    if power > 0.0:
        corr = np.correlate(coherence, coherence, mode="full")[coherence.size - 1:]
        series = np.abs(corr) / abs(corr[0])
        peaks = sorted(_refined_peaks(series, dt, _PEAK_PROMINENCE), key=lambda p: -p[1])
        detected = tuple(lag for lag, _ in peaks[:8])
        for lag, _prom in peaks:
            nearest = max(1, int(round(lag / t1)))
            if abs(lag - nearest * t1) / t1 > 0.1:
                secondary_period = lag
                if math.isfinite(t2) and t2 > 0.0:
                    secondary_deviation = abs(lag - t2) / t2
                break

    return PeriodicityReport(
        classification="Periodic-T1" if periodic else "Aperiodic",
        t1_period=t1,
        t2_period=t2,
        transient=transient,
        min_fidelity=min_fidelity,
        overlap_phase=overlap_phase,
        vector_period=vector_period,
        detected_periods=detected,
        secondary_period=secondary_period,
        secondary_deviation=secondary_deviation,
        fidelity_times=traj.times[start:stop].copy(),
        fidelity=fidelity,
    )


def write_trajectory_csv(path, traj: Trajectory, stride: int = 1) -> None:
    """Dump stored site intensities: t, |a_n|^2, |b_n|^2, norm_log.

    ``stride`` keeps every stride-th snapshot; columns carry the centered
    cell labels of :meth:`Trajectory.cell_index`.
    """
    if stride < 1:
        raise ParameterError("stride must be at least 1")
    cells = traj.cell_index()
    header = (
        "t,"
        + ",".join(f"pa_{n}" for n in cells)
        + ","
        + ",".join(f"pb_{n}" for n in cells)
        + ",norm_log"
    )
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for i in range(0, traj.times.size, stride):
            weights = np.abs(traj.states[i]) ** 2
            row = [f"{traj.times[i]:.17g}"]
            row.extend(f"{w:.17g}" for w in weights)
            row.append(f"{traj.norm_log[i]:.17g}")
            fh.write(",".join(row) + "\n")


def _json_number(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def write_report_json(path, report: PeriodicityReport) -> None:
    """Serialize a periodicity report; non-finite numbers become null."""
    payload = {
        "classification": report.classification,
        "t1_period": _json_number(report.t1_period),
        "t2_period": _json_number(report.t2_period),
        "transient": _json_number(report.transient),
        "min_fidelity": _json_number(report.min_fidelity),
        "overlap_phase": _json_number(report.overlap_phase),
        "vector_period": _json_number(report.vector_period),
        "detected_periods": [_json_number(x) for x in report.detected_periods],
        "secondary_period": _json_number(report.secondary_period),
        "secondary_deviation": _json_number(report.secondary_deviation),
        "fidelity_times": [_json_number(x) for x in report.fidelity_times],
        "fidelity": [_json_number(x) for x in report.fidelity],
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
