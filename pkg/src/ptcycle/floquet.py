"""Quasi-energies of the slowly cycled two-level system.

The cycle k = omega * t turns the Bloch Hamiltonian into a time-periodic
drive with period T = 2*pi/omega.  The monodromy matrix (one-period
propagator) is integrated for the trace-free part of H; removing the
shared detuning G(k) keeps det M = 1 and caps the growth rate at the
band imaginary part, and its average feeds back into the quasi-energies
as a plain shift (1/2*pi) * integral of G.

Above the critical strength the propagator grows like exp(Im E * T),
which overflows doubles at small omega, so the integration runs in
segments with a running log-scale factor that rejoins the calculation
inside the eigenvalue logarithm.  Quasi-energies carry an omega ambiguity
in their real part; the principal fold lands in (-omega/2, omega/2] and
the reported branch is the integer multiple of omega that brings the fold
closest to the adiabatic estimate, which is how the smooth-in-lambda
curves of the slow-cycle regime are reconstructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from .berry import BerryResult, _fold as _fold_berry, _raw_gamma, _zero_eps_degeneracies
from .errors import (
    DegenerateFloquetError,
    ExceptionalPointError,
    IntegrationError,
    NearCriticalError,
    ParameterError,
)
from .models import TwoLevelModel
from .spectral import _branch_sqrt, eigensystem

__all__ = [
    "IntegratorStats",
    "QuasiEnergyResult",
    "monodromy",
    "quasi_energies",
    "adiabatic_quasi_energy",
    "exact_example1",
]

_TWO_PI = 2.0 * math.pi

_ODE_RTOL = 1e-11
_ODE_ATOL = 1e-11
_MAX_STEPS = 10_000_000
_RESCALE_AT = 1e100
# target growth exponent per integration segment
_SEGMENT_EXPONENT = 80.0


@dataclass(frozen=True)
class IntegratorStats:
    """Bookkeeping from the monodromy integration."""

    steps: int
    rhs_evaluations: int
    segments: int
    scale_log: float
    local_tolerance: float


@dataclass(frozen=True)
class QuasiEnergyResult:
    """Exact and adiabatic quasi-energies for one (model, omega) point."""

    mu_plus: complex
    mu_minus: complex
    mu_adiabatic_plus: complex
    branch_index: int
    omega: float
    integrator_stats: IntegratorStats
    berry: BerryResult | None = None
    g_average: float = 0.0


class _Adiabatic(NamedTuple):
    mu_plus: complex
    mu_minus: complex
    berry: BerryResult


class _FloquetCore(NamedTuple):
    """Quasi-energy result plus the factored monodromy it came from."""

    result: "QuasiEnergyResult"
    matrix: np.ndarray
    scale_log: float
    lam_plus: complex
    lam_minus: complex | None


def _traceless_rhs(model: TwoLevelModel, omega: float):
    lam = model.lam
    eps = model.epsilon

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        k = omega * t
        w = float(model.w(k))
        r = float(model.r(k))
        ph = float(model.phi(k))
        diag = 1j * lam * w + eps
        off = r * complex(math.cos(ph), math.sin(ph))
        h11 = -1j * diag
        h12 = -1j * off
        h21 = -1j * off.conjugate()
        return np.array([
            h11 * y[0] + h12 * y[2],
            h11 * y[1] + h12 * y[3],
            h21 * y[0] - h11 * y[2],
            h21 * y[1] - h11 * y[3],
        ])

    return rhs


def _growth_exponent(model: TwoLevelModel, period: float) -> float:
    ks = np.linspace(0.0, _TWO_PI, 256, endpoint=False)
    im_max = float(np.max(np.abs(np.imag(_branch_sqrt(model, ks)))))
    return im_max * period


def _scaled_monodromy(model: TwoLevelModel, omega: float, reverse: bool = False,
                      rtol: float | None = None):
    """Propagator of the trace-free system as (matrix, log-scale, stats).

    With ``reverse`` the integration runs from t = T back to 0, so the
    decaying branch of the forward problem becomes the dominant one.
    """
    if not omega > 0.0:
        raise ParameterError(f"cycle frequency must be positive, got {omega}")
    tol = _ODE_RTOL if rtol is None else rtol
    period = _TWO_PI / omega
    n_seg = max(8, int(math.ceil(_growth_exponent(model, period) / _SEGMENT_EXPONENT)))
    if reverse:
        bounds = np.linspace(period, 0.0, n_seg + 1)
    else:
        bounds = np.linspace(0.0, period, n_seg + 1)

    rhs = _traceless_rhs(model, omega)
    y = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)
    scale_log = 0.0
    steps = 0
    nfev = 0
    for t0, t1 in zip(bounds[:-1], bounds[1:]):
        sol = solve_ivp(rhs, (t0, t1), y, method="DOP853",
                        rtol=tol, atol=tol)
        steps += len(sol.t) - 1
        nfev += sol.nfev
        if not sol.success:
            raise IntegrationError(
                f"propagator integration stalled at t={sol.t[-1]:.6g} of {period:.6g}",
                t_reached=float(sol.t[-1]),
            )
        if steps > _MAX_STEPS:
            raise IntegrationError(
                f"step budget {_MAX_STEPS} exhausted at t={t1:.6g}",
                t_reached=float(t1),
            )
        y = sol.y[:, -1]
        peak = float(np.max(np.abs(y)))
        if peak > _RESCALE_AT:
            y = y / peak
            scale_log += math.log(peak)

    stats = IntegratorStats(
        steps=steps,
        rhs_evaluations=nfev,
        segments=n_seg,
        scale_log=scale_log,
        local_tolerance=tol,
    )
    return y.reshape(2, 2), scale_log, stats


def monodromy(model: TwoLevelModel, omega: float) -> np.ndarray:
    """One-period propagator of the trace-free system as a plain matrix.

    The shared detuning G(k) is gauged away before integration; its average
    re-enters quasi-energies as a shift, not the matrix.  Raises when the
    entries physically exceed the double range (then only the factored form
    used by :func:`quasi_energies` exists).
    """
    matrix, scale_log, _ = _scaled_monodromy(model, omega)
    if scale_log == 0.0:
        return matrix
    if scale_log > 690.0:
        raise IntegrationError(
            f"propagator entries reach exp({scale_log:.1f}), beyond double "
            "range; quasi_energies handles this via the factored form",
            t_reached=_TWO_PI / omega,
        )
    return matrix * math.exp(scale_log)


def _eigenvalues(matrix: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 matrix, large-modulus first, cancellation-safe."""
    tr = matrix[0, 0] + matrix[1, 1]
    det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
    disc = tr * tr - 4.0 * det
    scale = max(abs(tr) ** 2, 4.0 * abs(det), 1e-300)
    if abs(disc) <= 1e-12 * scale:
        norm = float(np.linalg.norm(matrix))
        if np.linalg.norm(matrix - 0.5 * tr * np.eye(2)) <= 1e-8 * max(norm, 1e-300):
            return 0.5 * tr, 0.5 * tr
        raise DegenerateFloquetError(
            "monodromy matrix is defective: coalescing Floquet eigenvalues"
        )
    sq = np.sqrt(disc)
    if (tr.conjugate() * sq).real < 0.0:
        sq = -sq
    big = 0.5 * (tr + sq)
    return complex(big), complex(det / big)


def _fold_real(re: float, omega: float) -> float:
    """Shift by a multiple of omega into (-omega/2, omega/2]."""
    return re - omega * math.ceil(re / omega - 0.5)


def _eigvec_2x2(matrix: np.ndarray, lam_e: complex) -> np.ndarray:
    """Unit eigenvector of a 2x2 matrix from the better-conditioned row."""
    cand_a = np.array([matrix[0, 1], lam_e - matrix[0, 0]])
    cand_b = np.array([lam_e - matrix[1, 1], matrix[1, 0]])
    x = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return np.array([1.0, 0.0], dtype=complex)
    return x / norm


def _mu_from_eigenvalue(lam_e: complex, scale_log: float, omega: float) -> complex:
    period = _TWO_PI / omega
    re = _fold_real(-np.angle(lam_e) / period, omega)
    im = (math.log(abs(lam_e)) + scale_log) / period
    return complex(re, im)


def _g_average(model: TwoLevelModel) -> float:
    val, _ = quad(lambda k: float(model.g(k)), 0.0, _TWO_PI,
                  epsabs=1e-12, limit=200)
    return val / _TWO_PI


def _band_average(model: TwoLevelModel) -> complex:
    """(1/2*pi) * integral of D(k), the dominant-branch dynamical average."""
    seeds = _zero_eps_degeneracies(model) if model.lam != 0.0 else []
    val, _ = quad(lambda k: complex(_branch_sqrt(model, k)), 0.0, _TWO_PI,
                  points=seeds or None, limit=400, epsabs=1e-10,
                  complex_func=True)
    return val / _TWO_PI


def _adiabatic(model: TwoLevelModel, omega: float) -> _Adiabatic:
    gamma_raw, eps_used, q_err, quantized = _raw_gamma(model)
    berry = BerryResult(
        gamma_plus=_fold_berry(gamma_raw),
        gamma_minus=_fold_berry(-gamma_raw),
        re_quantized=quantized,
        epsilon_used=eps_used,
        quadrature_error=q_err,
    )
    g_bar = _g_average(model)
    s_bar = _band_average(model)
    shift = omega / _TWO_PI
    return _Adiabatic(
        mu_plus=g_bar + s_bar + shift * gamma_raw,
        mu_minus=g_bar - s_bar - shift * gamma_raw,
        berry=berry,
    )


def adiabatic_quasi_energy(model: TwoLevelModel, omega: float) -> tuple[complex, complex]:
    """Band average plus geometric correction, (mu_plus, mu_minus).

    Uses the unfolded geometric phase so the estimate tracks the branch
    that is continuous in the gain-loss strength.
    """
    if not omega > 0.0:
        raise ParameterError(f"cycle frequency must be positive, got {omega}")
    result = _adiabatic(model, omega)
    return result.mu_plus, result.mu_minus


def _floquet_core(model: TwoLevelModel, omega: float,
                  rtol: float | None = None) -> _FloquetCore:
    matrix, scale_log, stats = _scaled_monodromy(model, omega, rtol=rtol)
    lam_big, lam_small = _eigenvalues(matrix)
    mu_big = _mu_from_eigenvalue(lam_big, scale_log, omega)
    # Under strong growth the scaled determinant underflows and the small
    # eigenvalue is lost; it is then never used (see `independent` below).
    mu_small = (_mu_from_eigenvalue(lam_small, scale_log, omega)
                if abs(lam_small) > 0.0 else None)

    if mu_small is None:
        picked_big = True
    elif mu_big.imag - mu_small.imag > 1e-12 * max(1.0, abs(mu_big.imag)):
        picked_big = True
    else:
        # Equal moduli (unbroken cycle): the fold erases which eigenvalue
        # continues the upper band, but its Floquet state is still the
        # adiabatic deformation of the k = 0 upper eigenvector, so the
        # biorthogonal overlap with v_plus(0) identifies it.
        picked_big = mu_big.real >= mu_small.real
        try:
            es0 = eigensystem(model, 0.0)
        except ExceptionalPointError:
            es0 = None
        if es0 is not None:
            ov_big = abs(np.vdot(es0.v_plus, _eigvec_2x2(matrix, lam_big)))
            ov_small = abs(np.vdot(es0.v_plus, _eigvec_2x2(matrix, lam_small)))
            if abs(ov_big - ov_small) > 1e-9:
                picked_big = ov_big > ov_small
    if picked_big:
        mu_p, mu_other = mu_big, mu_small
        lam_p, lam_o = lam_big, (lam_small if mu_small is not None else None)
    else:
        mu_p, mu_other = mu_small, mu_big
        lam_p, lam_o = lam_small, lam_big

    g_bar = _g_average(model)
    try:
        ad = _adiabatic(model, omega)
    except NearCriticalError:
        ad = None

    if ad is not None:
        branch = int(round((ad.mu_plus.real - g_bar - mu_p.real) / omega))
    else:
        branch = 0
    mu_plus = g_bar + complex(mu_p.real + branch * omega, mu_p.imag)

    # The independent second eigenvalue is trustworthy only while no
    # rescaling happened and the entries stayed small; otherwise the small
    # eigenvalue is wiped out by cancellation in det and the trace-free
    # negation is exact anyway.
    independent = (mu_other is not None and scale_log == 0.0
                   and float(np.max(np.abs(matrix))) <= 1e3)
    target = -(mu_p.real + branch * omega)
    if independent:
        align = int(round((target - mu_other.real) / omega))
        mu_minus = g_bar + complex(mu_other.real + align * omega, mu_other.imag)
    else:
        mu_minus = 2.0 * g_bar - mu_plus

    result = QuasiEnergyResult(
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        mu_adiabatic_plus=ad.mu_plus if ad is not None else complex("nan+nanj"),
        branch_index=branch,
        omega=omega,
        integrator_stats=stats,
        berry=ad.berry if ad is not None else None,
        g_average=g_bar,
    )
    return _FloquetCore(result=result, matrix=matrix, scale_log=scale_log,
                        lam_plus=lam_p, lam_minus=lam_o)


def quasi_energies(model: TwoLevelModel, omega: float) -> QuasiEnergyResult:
    """Exact quasi-energies from the monodromy spectrum, branch-matched.

    The dominant branch mu_plus has the larger imaginary part (ties go to
    the branch continuing the upper band).  Its real part is folded into
    (-omega/2, omega/2] and then shifted by branch_index * omega to meet
    the adiabatic estimate; near the critical strength, where that
    estimate does not exist, the principal fold is kept and
    mu_adiabatic_plus is nan.
    """
    return _floquet_core(model, omega).result


def exact_example1(r0: float, lam: float, omega: float) -> tuple[complex, complex]:
    """Closed-form quasi-energies of the constant-coupling winding model.

    In the frame co-rotating with the coupling phase the drive becomes a
    static Hamiltonian with complex detuning omega/2 + i*lam, giving
    mu_pm = +-sqrt(r0^2 + (omega/2 + i*lam)^2) -+ omega/2 on the principal
    root (its argument stays in the upper half-plane for lam > 0).
    """
    if not r0 > 0.0:
        raise ParameterError(f"coupling r0 must be positive, got {r0}")
    b = 0.5 * omega + 1j * lam
    root = complex(np.sqrt(r0 * r0 + b * b + 0j))
    return root - 0.5 * omega, -root + 0.5 * omega
