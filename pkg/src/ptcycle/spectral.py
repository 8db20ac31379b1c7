"""Instantaneous eigenproblem of the two-level Bloch Hamiltonian.

Energies come as E_pm = G +- D(k) where the discriminant

    D(k) = s0 * sqrt(R^2 - (lam*W - i*eps)^2)

uses the principal square root and a global sign ``s0`` fixed at k = 0 so
that Im E_plus >= 0 there (ties broken by Re E_plus - G >= 0).  The
argument of the root only touches the negative real axis where W = 0, and
there it equals R^2 + eps^2 > 0, so the principal branch is continuous
along any k-sweep; at eps = 0 the argument is kept real and promoted with
+0j so the gain branch sits on the upper side of the cut.

Eigenvectors follow the half-angle construction: with cos(theta) = d/D and
sin(theta) = R/D, d = i*lam*W + eps, the complex angle is recovered from
the principal logarithm, theta = -i*Log(cos(theta) + i*sin(theta)).  Below
the critical gain-loss strength this reduces exactly to
theta = pi/2 - i*psi with tanh(psi) = lam*W/R real.  The resulting pair

    u_plus = (cos(theta/2), sin(theta/2) e^{-i phi}),
    u_minus = (sin(theta/2), -cos(theta/2) e^{-i phi})

diagonalizes H(k) for any branch of theta, and the left vectors carry the
conjugated coefficients, which makes <v_n|u_m> = delta_nm an algebraic
identity rather than a numerical goal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ExceptionalPointError, ParameterError
from .models import TwoLevelModel

__all__ = ["EigenSystem", "energies", "eigensystem", "critical_lambda", "EP_TOL"]

_TWO_PI = 2.0 * math.pi

# Relative tolerance below which |D^2| marks an exceptional point.
EP_TOL = 1e-14


def _disc_squared(model: TwoLevelModel, k):
    """R^2 - (lam*W - i*eps)^2, kept real (then promoted +0j) when eps = 0."""
    r = np.asarray(model.r(k))
    w = np.asarray(model.w(k))
    if model.epsilon == 0.0:
        return (r * r - (model.lam * w) ** 2) + 0.0j
    return (r * r - (model.lam * w - 1j * model.epsilon) ** 2) + 0.0j


def _sign_at_zero(model: TwoLevelModel) -> float:
    d0 = np.sqrt(_disc_squared(model, 0.0))
    if d0.imag > 0.0:
        return 1.0
    if d0.imag < 0.0:
        return -1.0
    return 1.0 if d0.real >= 0.0 else -1.0


def _branch_sqrt(model: TwoLevelModel, k):
    """Discriminant D(k) on the continuous branch fixed at k = 0."""
    return _sign_at_zero(model) * np.sqrt(_disc_squared(model, k))


@dataclass(frozen=True)
class EigenSystem:
    """Energies, biorthogonal eigenvectors and angles at one momentum."""

    k: float
    e_plus: complex
    e_minus: complex
    u_plus: np.ndarray
    u_minus: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    theta: complex
    psi: complex


def energies(model: TwoLevelModel, k):
    """Both energy branches at ``k`` (scalar or array), continuity gauge."""
    g = np.asarray(model.g(k))
    d = _branch_sqrt(model, k)
    e_plus = g + d
    e_minus = g - d
    if np.ndim(k) == 0:
        return complex(e_plus), complex(e_minus)
    return e_plus, e_minus


def eigensystem(model: TwoLevelModel, k: float, *, ep_tol: float = EP_TOL) -> EigenSystem:
    """Full eigensystem at one momentum.

    Raises an exceptional-point error when the discriminant is smaller than
    ``ep_tol`` relative to the model scales, since the eigenvectors coalesce
    there and no biorthogonal pair exists.
    """
    k = float(k)
    g = complex(model.g(k))
    r = float(model.r(k))
    w = float(model.w(k))
    phi = float(model.phi(k))

    disc2 = complex(_disc_squared(model, k))
    scale = max(r * r, (model.lam * w) ** 2)
    if abs(disc2) <= ep_tol * scale:
        raise ExceptionalPointError(
            f"eigenvectors coalesce at k={k:.6g} (|D^2|={abs(disc2):.3e})",
            k=k, defect=abs(disc2),
        )

    big_d = _sign_at_zero(model) * np.sqrt(disc2)
    d_diag = 1j * model.lam * w + model.epsilon
    cos_t = d_diag / big_d
    sin_t = r / big_d
    theta = -1j * np.log(cos_t + 1j * sin_t)
    psi = 1j * (theta - 0.5 * math.pi)

    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    ph = np.exp(-1j * phi)
    u_plus = np.array([c, s * ph])
    u_minus = np.array([s, -c * ph])
    v_plus = np.array([np.conj(c), np.conj(s) * ph])
    v_minus = np.array([np.conj(s), -np.conj(c) * ph])

    return EigenSystem(
        k=k,
        e_plus=complex(g + big_d),
        e_minus=complex(g - big_d),
        u_plus=u_plus,
        u_minus=u_minus,
        v_plus=v_plus,
        v_minus=v_minus,
        theta=complex(theta),
        psi=complex(psi),
    )


def critical_lambda(model: TwoLevelModel, grid_size: int = 256) -> float:
    """Smallest gain-loss strength with an exceptional point, min_k |R/W|.

    Scans a uniform grid, then refines the best bracket with a bounded
    scalar minimization.  Returns ``math.inf`` when W vanishes identically
    (the spectrum stays real at every strength).
    """
    if grid_size < 64:
        raise ParameterError(f"grid_size must be at least 64, got {grid_size}")

    ks = np.linspace(0.0, _TWO_PI, grid_size, endpoint=False)
    r = np.abs(np.asarray(model.r(ks), dtype=float))
    w = np.abs(np.asarray(model.w(ks), dtype=float))
    if w.max() <= 1e-15 * max(1.0, r.max()):
        return math.inf

    with np.errstate(divide="ignore"):
        ratio = np.where(w > 0.0, r / np.where(w > 0.0, w, 1.0), np.inf)
    i_min = int(np.argmin(ratio))
    h = _TWO_PI / grid_size

    def objective(k: float) -> float:
        rr = abs(float(model.r(k)))
        ww = abs(float(model.w(k)))
        return rr / ww if ww > 0.0 else math.inf

    res = minimize_scalar(
        objective,
        bounds=(ks[i_min] - h, ks[i_min] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return min(float(ratio[i_min]), float(res.fun))
