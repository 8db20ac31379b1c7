"""Non-Hermitian Berry connection and complex geometric phases.

The connection matrix in the biorthogonal basis has the closed forms

    A_pp = -(dphi/dk) (1 - cos theta)/2
    A_mm = -(dphi/dk) (1 + cos theta)/2
    A_pm = -(i/2) dtheta/dk + (dphi/dk) sin(theta)/2
    A_mp = +(i/2) dtheta/dk + (dphi/dk) sin(theta)/2

with dtheta/dk = [R'(i lam W + eps) - i lam W' R] / (R^2 - (lam W - i eps)^2),
a single-valued expression that never touches the square-root branch.

Integrating the diagonal over one Brillouin-zone cycle gives the geometric
phase of each band.  The phase lift contributes exactly -pi * winding, so
only

    gamma_plus = -pi * winding + (i/2) * integral of dphi/dk * sinh(psi)

is computed by quadrature, with sinh(psi) = (lam W - i eps) / D.  Below the
critical strength the integrand is real: the imaginary part of gamma is the
geometric amplification rate and the real part is quantized to {0, pi}.
Above it the eps = 0 integrand blows up at the band-touching momenta, so
the phase is evaluated on regularized copies at eps in {1e-3, 1e-4, 1e-5}
and extrapolated to eps -> 0.  The extrapolation basis adapts to the limit
structure: where zero-eps degeneracies exist in k the correction scales
like sqrt(eps) (basis 1, sqrt(eps), eps), otherwise the phase is analytic
in eps (basis 1, eps, eps^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ExceptionalPointError, NearCriticalError
from .models import TwoLevelModel
from .spectral import EP_TOL, critical_lambda, _branch_sqrt, _disc_squared

__all__ = ["BerryResult", "berry_connection", "berry_phase", "EPSILON_SCHEDULE"]

_TWO_PI = 2.0 * math.pi

# Regularization offsets used above the critical strength, coarse to fine.
EPSILON_SCHEDULE = (1e-3, 1e-4, 1e-5)

_QUAD_ABS_TOL = 1e-10
_QUAD_LIMIT = 400


@dataclass(frozen=True)
class BerryResult:
    """Complex geometric phases of both bands over one cycle."""

    gamma_plus: complex
    gamma_minus: complex
    re_quantized: float | None
    epsilon_used: float
    quadrature_error: float


def berry_connection(model: TwoLevelModel, k: float, *, ep_tol: float = EP_TOL) -> np.ndarray:
    """2x2 connection matrix [[A_pp, A_pm], [A_mp, A_mm]] at one momentum."""
    k = float(k)
    r = float(model.r(k))
    w = float(model.w(k))
    dr = float(model.dr_at(k))
    dw = float(model.dw_at(k))
    dphi = float(model.dphi_at(k))

    disc2 = complex(_disc_squared(model, k))
    scale = max(r * r, (model.lam * w) ** 2)
    if abs(disc2) <= ep_tol * scale:
        raise ExceptionalPointError(
            f"connection undefined at k={k:.6g} (|D^2|={abs(disc2):.3e})",
            k=k, defect=abs(disc2),
        )

    big_d = complex(_branch_sqrt(model, k))
    d_diag = 1j * model.lam * w + model.epsilon
    cos_t = d_diag / big_d
    sin_t = r / big_d
    dtheta = (dr * d_diag - 1j * model.lam * dw * r) / disc2

    a_pp = -0.5 * dphi * (1.0 - cos_t)
    a_mm = -0.5 * dphi * (1.0 + cos_t)
    a_pm = -0.5j * dtheta + 0.5 * dphi * sin_t
    a_mp = +0.5j * dtheta + 0.5 * dphi * sin_t
    return np.array([[a_pp, a_pm], [a_mp, a_mm]], dtype=complex)


def _zero_eps_degeneracies(model: TwoLevelModel, n_scan: int = 1024) -> list[float]:
    """Momenta in (0, 2*pi) where lam*W = +-R, the eps = 0 band touchings."""
    ks = np.linspace(0.0, _TWO_PI, n_scan + 1)
    w = np.asarray(model.w(ks), dtype=float)
    r = np.asarray(model.r(ks), dtype=float)
    roots: list[float] = []
    for sgn in (-1.0, 1.0):
        vals = model.lam * w + sgn * r

        def f(k: float, sgn: float = sgn) -> float:
            return model.lam * float(model.w(k)) + sgn * float(model.r(k))

        for i in np.flatnonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:])):
            roots.append(float(brentq(f, ks[i], ks[i + 1], xtol=1e-13)))
    return sorted({round(x, 12) for x in roots if 0.0 < x < _TWO_PI})


def _phase_integral(model: TwoLevelModel) -> tuple[complex, float]:
    """(i/2) * integral of dphi/dk * sinh(psi) over one cycle, with error."""
    seeds = _zero_eps_degeneracies(model) if model.lam != 0.0 else []

    def integrand(k: float) -> complex:
        big_d = complex(_branch_sqrt(model, k))
        num = model.lam * float(model.w(k)) - 1j * model.epsilon
        return float(model.dphi_at(k)) * num / big_d

    val, err = quad(
        integrand, 0.0, _TWO_PI,
        points=seeds or None,
        limit=_QUAD_LIMIT,
        epsabs=_QUAD_ABS_TOL,
        complex_func=True,
    )
    return 0.5j * val, 0.5 * (abs(err.real) + abs(err.imag))


def _fold(z: complex) -> complex:
    """Shift the real part by a multiple of 2*pi into [-pi, pi)."""
    re = z.real - _TWO_PI * math.floor((z.real + math.pi) / _TWO_PI)
    return complex(re, z.imag)


def _extrapolation_weights(eps: np.ndarray, sqrt_basis: bool) -> np.ndarray:
    """Weights L with sum_i L_i * gamma(eps_i) = fitted value at eps = 0."""
    if sqrt_basis:
        cols = [np.ones_like(eps), np.sqrt(eps), eps]
    else:
        cols = [np.ones_like(eps), eps, eps * eps]
    v = np.column_stack(cols[: len(eps)])
    e0 = np.zeros(len(eps))
    e0[0] = 1.0
    return np.linalg.solve(v.T, e0)


def _raw_gamma(model: TwoLevelModel) -> tuple[complex, float, float, float | None]:
    """Unfolded gamma_plus with (epsilon_used, quadrature_error, re_quantized).

    The unfolded value keeps the continuous-in-lambda branch that the
    adiabatic quasi-energy needs; folding into [-pi, pi) happens only when
    packaging a BerryResult.
    """
    winding = model.phi_winding

    if model.epsilon != 0.0:
        integral, q_err = _phase_integral(model)
        return -math.pi * winding + integral, model.epsilon, q_err, None

    lam_c = critical_lambda(model)
    if math.isfinite(lam_c) and abs(abs(model.lam) - lam_c) < 1e-3:
        raise NearCriticalError(
            f"gain-loss strength {model.lam:.6g} is within 1e-3 of the "
            f"critical value {lam_c:.6g}; the geometric phase diverges there",
            lam=model.lam, lam_critical=lam_c,
        )

    if abs(model.lam) < lam_c:
        integral, q_err = _phase_integral(model)
        gamma_p = -math.pi * winding + integral
        m = math.fmod(gamma_p.real, _TWO_PI)
        if m < 0.0:
            m += _TWO_PI
        quantized = 0.0 if min(m, _TWO_PI - m) < 0.5 * math.pi else math.pi
        return gamma_p, 0.0, q_err, quantized

    eps = np.sort(np.array(EPSILON_SCHEDULE, dtype=float))[::-1]
    integrals = np.empty(len(eps), dtype=complex)
    q_errs = np.empty(len(eps))
    for i, e in enumerate(eps):
        integrals[i], q_errs[i] = _phase_integral(model.with_epsilon(float(e)))

    sqrt_basis = bool(_zero_eps_degeneracies(model))
    w3 = _extrapolation_weights(eps, sqrt_basis)
    i0_three = complex(np.dot(w3, integrals))
    w2 = _extrapolation_weights(eps[1:], sqrt_basis)
    i0_two = complex(np.dot(w2, integrals[1:]))

    err = abs(i0_three - i0_two) + float(np.dot(np.abs(w3), q_errs))
    return -math.pi * winding + i0_three, float(eps[-1]), err, None


def berry_phase(model: TwoLevelModel) -> BerryResult:
    """Complex geometric phases of both bands, real parts in [-pi, pi).

    Refuses strengths within 1e-3 of the critical value, where the cycle
    sweeps through a quadratic band touching and the phase diverges.
    """
    gamma_p, eps_used, q_err, quantized = _raw_gamma(model)
    return BerryResult(
        gamma_plus=_fold(gamma_p),
        gamma_minus=_fold(-gamma_p),
        re_quantized=quantized,
        epsilon_used=eps_used,
        quadrature_error=q_err,
    )
