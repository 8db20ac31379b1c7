"""Two-level Bloch models with balanced gain and loss.

The central object is :class:`TwoLevelModel`, a 2x2 k-periodic Hamiltonian

    H(k) = [[ g + i*lam*w + eps,  r * exp(+i*phi) ],
            [ r * exp(-i*phi),    g - i*lam*w - eps ]]

with real 2*pi-periodic profile functions ``g`` (shared detuning), ``w``
(gain-loss density), ``r`` (coupling magnitude, nonvanishing) and a phase
``phi`` whose continuous lift may wind.  ``lam`` scales the anti-Hermitian
part; ``eps`` is a small symmetry-breaking offset used by regularized
calculations.  At ``eps = 0`` the model commutes with the combined
conjugation-swap operation sigma_x K.

Models are built three ways: the builtin families 1..3 with closed-form
derivatives, Bloch reduction of a two-sublattice hopping table
(:func:`bloch_from_hoppings`), or a JSON-style descriptor dictionary
(:func:`parse_model_descriptor`).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidModelError, SymmetryError

__all__ = [
    "TwoLevelModel",
    "LatticeHoppings",
    "builtin_example",
    "builtin_lattice",
    "bloch_from_hoppings",
    "parse_model_descriptor",
    "hamiltonian_at",
]

_TWO_PI = 2.0 * math.pi

# Grid used to validate profiles and to lift phi to a continuous branch.
_CHECK_GRID = 512
_LIFT_GRID = 8192
# Central-difference step for models without closed-form derivatives.
FD_STEP = _TWO_PI / 8192


@dataclass(frozen=True)
class TwoLevelModel:
    """Immutable description of a cycled two-level Hamiltonian.

    Parameters
    ----------
    g, w, r, phi:
        Real-valued 2*pi-periodic functions of k.  They must accept numpy
        arrays (use numpy ufuncs inside).  ``phi`` is the continuous lift,
        so ``phi(2*pi) - phi(0) = 2*pi*phi_winding``.
    dg, dw, dr, dphi:
        Optional closed-form derivatives.  When absent, central finite
        differences with step ``FD_STEP`` are used.
    phi_winding:
        Integer winding of the coupling phase over one cycle.
    lam:
        Gain-loss strength multiplying ``w``.
    epsilon:
        Symmetry-breaking diagonal offset (0 for the physical model).
    """

    g: Callable[[float], float]
    w: Callable[[float], float]
    r: Callable[[float], float]
    phi: Callable[[float], float]
    lam: float
    phi_winding: int = 0
    epsilon: float = 0.0
    dg: Callable[[float], float] | None = None
    dw: Callable[[float], float] | None = None
    dr: Callable[[float], float] | None = None
    dphi: Callable[[float], float] | None = None
    label: str = "custom"
    # descriptor metadata kept so sweeps can rebuild / rehash configs
    descriptor: dict | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        _validate_profiles(self)

    def with_lambda(self, lam: float) -> "TwoLevelModel":
        return dataclasses.replace(self, lam=float(lam))

    def with_epsilon(self, epsilon: float) -> "TwoLevelModel":
        return dataclasses.replace(self, epsilon=float(epsilon))

    # -- derivative accessors -------------------------------------------------

    def dphi_at(self, k):
        if self.dphi is not None:
            return self.dphi(k)
        return _central_diff(self.phi, k)

    def dr_at(self, k):
        if self.dr is not None:
            return self.dr(k)
        return _central_diff(self.r, k)

    def dw_at(self, k):
        if self.dw is not None:
            return self.dw(k)
        return _central_diff(self.w, k)

    def dg_at(self, k):
        if self.dg is not None:
            return self.dg(k)
        return _central_diff(self.g, k)


def _central_diff(f, k):
    return (f(k + FD_STEP) - f(k - FD_STEP)) / (2.0 * FD_STEP)


def _validate_profiles(m: TwoLevelModel) -> None:
    ks = np.linspace(0.0, _TWO_PI, _CHECK_GRID, endpoint=False)
    r = np.asarray(m.r(ks), dtype=float)
    if not np.all(np.isfinite(r)) or np.any(np.abs(r) <= 0.0):
        raise InvalidModelError("coupling magnitude r(k) must be finite and nonvanishing")
    # spot-check 2*pi periodicity of the scalar profiles
    probes = np.array([0.0, 1.0, 2.5, 4.0])
    for name, f in (("g", m.g), ("w", m.w), ("r", m.r)):
        delta = np.max(np.abs(np.asarray(f(probes + _TWO_PI)) - np.asarray(f(probes))))
        if delta > 1e-12:
            raise InvalidModelError(f"profile {name}(k) is not 2*pi-periodic (residual {delta:.2e})")
    lift = np.asarray(m.phi(probes + _TWO_PI)) - np.asarray(m.phi(probes))
    expect = _TWO_PI * m.phi_winding
    if np.max(np.abs(lift - expect)) > 1e-9:
        raise InvalidModelError(
            "phi(k) must be a continuous lift with phi(k + 2*pi) = phi(k) + 2*pi*phi_winding"
        )


def hamiltonian_at(model: TwoLevelModel, k: float) -> np.ndarray:
    """Instantaneous 2x2 Bloch Hamiltonian at momentum ``k``."""
    g = float(model.g(k))
    diag = 1j * model.lam * float(model.w(k)) + model.epsilon
    off = float(model.r(k)) * np.exp(1j * float(model.phi(k)))
    return np.array([[g + diag, off], [np.conj(off), g - diag]], dtype=complex)


# ---------------------------------------------------------------------------
# builtin families
# ---------------------------------------------------------------------------


def builtin_example(which: int, params: Mapping[str, float] | None = None, *,
                    lam: float = 0.0, epsilon: float = 0.0) -> TwoLevelModel:
    """Construct one of the three builtin model families.

    1: constant coupling ``r0`` with a uniformly winding phase ``phi = k``
       (smooth transition, exactly solvable when cycled).
    2: cosine coupling ``t1 + t2*cos(k)`` with zero phase (sharp transition;
       requires ``t1 > t2 > 0``).
    3: Rice-Mele-like dimerized coupling with detuning ``t0*cos(k)``
       (smooth transition; requires ``t1 != t2``).
    """
    p = dict(params or {})
    if which == 1:
        r0 = float(p.pop("r0", p.pop("R0", 1.0)))
        if p:
            raise InvalidModelError(f"unknown parameters for example 1: {sorted(p)}")
        if r0 <= 0:
            raise InvalidModelError("example 1 requires r0 > 0")
        return TwoLevelModel(
            g=lambda k: np.zeros_like(np.asarray(k, dtype=float)) + 0.0,
            w=lambda k: np.ones_like(np.asarray(k, dtype=float)),
            r=lambda k: np.full_like(np.asarray(k, dtype=float), r0),
            phi=lambda k: np.asarray(k, dtype=float) * 1.0,
            dg=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dw=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dr=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dphi=lambda k: np.ones_like(np.asarray(k, dtype=float)),
            phi_winding=1,
            lam=float(lam),
            epsilon=float(epsilon),
            label=f"example1(r0={r0})",
            descriptor={"builtin": {"example": 1, "params": {"r0": r0}}},
        )
    if which == 2:
        t1 = float(p.pop("t1", 1.0))
        t2 = float(p.pop("t2", 0.5))
        if p:
            raise InvalidModelError(f"unknown parameters for example 2: {sorted(p)}")
        if not (t1 > t2 > 0):
            raise InvalidModelError("example 2 requires t1 > t2 > 0")
        return TwoLevelModel(
            g=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            w=lambda k: np.ones_like(np.asarray(k, dtype=float)),
            r=lambda k: t1 + t2 * np.cos(k),
            phi=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dg=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dw=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dr=lambda k: -t2 * np.sin(k),
            dphi=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            phi_winding=0,
            lam=float(lam),
            epsilon=float(epsilon),
            label=f"example2(t1={t1}, t2={t2})",
            descriptor={"builtin": {"example": 2, "params": {"t1": t1, "t2": t2}}},
        )
    if which == 3:
        t0 = float(p.pop("t0", 0.3))
        t1 = float(p.pop("t1", 0.5))
        t2 = float(p.pop("t2", 1.0))
        if p:
            raise InvalidModelError(f"unknown parameters for example 3: {sorted(p)}")
        if t1 <= 0 or t2 <= 0 or t1 == t2:
            raise InvalidModelError("example 3 requires t1, t2 > 0 and t1 != t2")

        def r3(k):
            return np.sqrt(t1 * t1 + t2 * t2 + 2.0 * t1 * t2 * np.cos(k))

        # The raw arg(t1 + t2 e^{ik}) jumps across the branch cut when
        # t2 > t1; factoring out e^{ik} leaves a cut-free arctangent.
        if t2 > t1:
            def phi3(k):
                k = np.asarray(k, dtype=float)
                return k + np.arctan2(-t1 * np.sin(k), t2 + t1 * np.cos(k))
            winding = 1
        else:
            def phi3(k):
                k = np.asarray(k, dtype=float)
                return np.arctan2(t2 * np.sin(k), t1 + t2 * np.cos(k))
            winding = 0

        return TwoLevelModel(
            g=lambda k: t0 * np.cos(k),
            w=lambda k: np.ones_like(np.asarray(k, dtype=float)),
            r=r3,
            phi=phi3,
            dg=lambda k: -t0 * np.sin(k),
            dw=lambda k: np.zeros_like(np.asarray(k, dtype=float)),
            dr=lambda k: -t1 * t2 * np.sin(k) / r3(k),
            dphi=lambda k: (t2 * t2 + t1 * t2 * np.cos(k)) / (r3(k) ** 2),
            phi_winding=winding,
            lam=float(lam),
            epsilon=float(epsilon),
            label=f"example3(t0={t0}, t1={t1}, t2={t2})",
            descriptor={"builtin": {"example": 3, "params": {"t0": t0, "t1": t1, "t2": t2}}},
        )
    raise InvalidModelError(f"unknown builtin example {which!r} (expected 1, 2 or 3)")


# ---------------------------------------------------------------------------
# lattice hoppings and their Bloch reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeHoppings:
    """Hopping table of a two-sublattice chain.

    ``rho[l]`` couples A(n) <- A(n-l); ``eta[l]`` couples B(n) <- B(n-l);
    ``sigma[l]`` couples A(n) <- B(n-l) and ``theta_h[l]`` the reverse.
    Bloch blocks follow as H_ab(k) = sum_l c_l exp(-i*k*l).

    Balanced gain and loss requires ``eta[-l] == conj(rho[l])`` and
    ``theta_h[-l] == conj(sigma[l])``; the constructor rejects tables that
    violate this instead of projecting them.
    """

    rho: Mapping[int, complex]
    sigma: Mapping[int, complex]
    theta_h: Mapping[int, complex]
    eta: Mapping[int, complex]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", {int(l): complex(v) for l, v in self.rho.items()})
        object.__setattr__(self, "sigma", {int(l): complex(v) for l, v in self.sigma.items()})
        object.__setattr__(self, "theta_h", {int(l): complex(v) for l, v in self.theta_h.items()})
        object.__setattr__(self, "eta", {int(l): complex(v) for l, v in self.eta.items()})
        self._check_symmetry()

    def _check_symmetry(self) -> None:
        worst = (0.0, None)
        for l in set(self.rho) | {-l for l in self.eta}:
            res = abs(self.eta.get(-l, 0j) - np.conj(self.rho.get(l, 0j)))
            if res > worst[0]:
                worst = (res, l)
        for l in set(self.sigma) | {-l for l in self.theta_h}:
            res = abs(self.theta_h.get(-l, 0j) - np.conj(self.sigma.get(l, 0j)))
            if res > worst[0]:
                worst = (res, l)
        if worst[0] > 1e-12:
            raise SymmetryError(
                f"hoppings break gain-loss balance at offset {worst[1]} "
                f"(residual {worst[0]:.3e})",
                offset=worst[1], residual=worst[0],
            )

    def max_range(self) -> int:
        offsets = [0]
        for table in (self.rho, self.sigma, self.theta_h, self.eta):
            offsets.extend(abs(l) for l in table)
        return max(offsets)


def builtin_lattice(which: int, params: Mapping[str, float] | None = None) -> LatticeHoppings:
    """Hopping tables whose Bloch reduction reproduces the builtin examples.

    The on-site gain/loss is stored with unit strength; scale it through the
    ``lam`` argument of :func:`bloch_from_hoppings` or of the lattice solvers.
    """
    p = dict(params or {})
    if which == 1:
        r0 = float(p.get("r0", p.get("R0", 1.0)))
        return LatticeHoppings(
            rho={0: 1j},
            eta={0: -1j},
            sigma={-1: r0},
            theta_h={1: r0},
        )
    if which == 2:
        t1 = float(p.get("t1", 1.0))
        t2 = float(p.get("t2", 0.5))
        return LatticeHoppings(
            rho={0: 1j},
            eta={0: -1j},
            sigma={0: t1, 1: 0.5 * t2, -1: 0.5 * t2},
            theta_h={0: t1, 1: 0.5 * t2, -1: 0.5 * t2},
        )
    if which == 3:
        t0 = float(p.get("t0", 0.3))
        t1 = float(p.get("t1", 0.5))
        t2 = float(p.get("t2", 1.0))
        return LatticeHoppings(
            rho={0: 1j, 1: 0.5 * t0, -1: 0.5 * t0},
            eta={0: -1j, 1: 0.5 * t0, -1: 0.5 * t0},
            sigma={0: t1, -1: t2},
            theta_h={0: t1, 1: t2},
        )
    raise InvalidModelError(f"no builtin lattice for example {which!r} (expected 1, 2 or 3)")


def _bloch_sum(table: Mapping[int, complex]):
    offsets = np.array(sorted(table), dtype=float)
    amps = np.array([table[int(l)] for l in sorted(table)], dtype=complex)

    def f(k):
        k = np.asarray(k, dtype=float)
        return (amps * np.exp(-1j * np.multiply.outer(k, offsets))).sum(axis=-1)

    def df(k):
        k = np.asarray(k, dtype=float)
        return (-1j * offsets * amps * np.exp(-1j * np.multiply.outer(k, offsets))).sum(axis=-1)

    return f, df


def bloch_from_hoppings(hoppings: LatticeHoppings, lam: float = 1.0,
                        epsilon: float = 0.0) -> TwoLevelModel:
    """Reduce a two-sublattice hopping table to a :class:`TwoLevelModel`.

    The diagonal Bloch block splits into its Hermitian part (the shared
    detuning g) and anti-Hermitian part (the gain-loss density w, extracted
    at unit strength); ``lam`` then rescales the latter.  The off-diagonal
    block supplies ``r`` and a continuous phase lift.
    """
    h11, dh11 = _bloch_sum(hoppings.rho)
    h12, dh12 = _bloch_sum(hoppings.sigma)

    ks = np.linspace(0.0, _TWO_PI, _LIFT_GRID, endpoint=False)
    off = h12(ks)
    mags = np.abs(off)
    if mags.min() < 1e-12:
        raise InvalidModelError(
            "off-diagonal Bloch block vanishes at some k; the coupling phase "
            "is undefined there"
        )
    grid_k = ks
    grid_phi = np.unwrap(np.angle(off))
    # Close the loop: the remaining increment from the last node back to k=0
    # is the angle difference folded to (-pi, pi].
    last_step = np.angle(off[0] / off[-1])
    winding = int(round((grid_phi[-1] - grid_phi[0] + last_step) / _TWO_PI))

    def phi(k):
        k = np.asarray(k, dtype=float)
        raw = np.angle(h12(k))
        # Piecewise-linear estimate of the lift on a period, then snap raw
        # angles to it by an integer multiple of 2*pi.  The grid is dense
        # enough (8192 nodes) that the estimate is always within pi.
        kf = np.mod(k, _TWO_PI)
        est = np.interp(kf, grid_k, grid_phi)
        tail = kf > grid_k[-1]
        if np.any(tail):
            slope = (grid_phi[0] + _TWO_PI * winding - grid_phi[-1]) / (_TWO_PI - grid_k[-1])
            est = np.where(tail, grid_phi[-1] + slope * (kf - grid_k[-1]), est)
        offset = np.round((est - raw) / _TWO_PI)
        return raw + _TWO_PI * offset + _TWO_PI * winding * np.floor_divide(k, _TWO_PI)

    def r(k):
        return np.abs(h12(k))

    def dr(k):
        v = h12(k)
        return np.real(np.conj(v) * dh12(k)) / np.abs(v)

    def dphi(k):
        v = h12(k)
        return np.imag(np.conj(v) * dh12(k)) / np.abs(v) ** 2

    return TwoLevelModel(
        g=lambda k: np.real(h11(k)),
        w=lambda k: np.imag(h11(k)),
        r=r,
        phi=phi,
        dg=lambda k: np.real(dh11(k)),
        dw=lambda k: np.imag(dh11(k)),
        dr=dr,
        dphi=dphi,
        phi_winding=winding,
        lam=float(lam),
        epsilon=float(epsilon),
        label="lattice",
        descriptor={"hoppings": _hoppings_descriptor(hoppings)},
    )


def _hoppings_descriptor(h: LatticeHoppings) -> dict:
    def enc(table):
        return {str(l): [v.real, v.imag] for l, v in sorted(table.items())}
    return {"rho": enc(h.rho), "sigma": enc(h.sigma),
            "theta": enc(h.theta_h), "eta": enc(h.eta)}


# ---------------------------------------------------------------------------
# descriptor parsing
# ---------------------------------------------------------------------------


def _decode_table(obj, name: str) -> dict[int, complex]:
    if not isinstance(obj, dict):
        raise InvalidModelError(f"hoppings table {name!r} must be an object")
    out: dict[int, complex] = {}
    for key, val in obj.items():
        try:
            l = int(key)
        except (TypeError, ValueError):
            raise InvalidModelError(f"hoppings table {name!r} has non-integer offset {key!r}")
        if isinstance(val, (int, float)):
            out[l] = complex(val)
        elif isinstance(val, (list, tuple)) and len(val) == 2:
            out[l] = complex(float(val[0]), float(val[1]))
        else:
            raise InvalidModelError(
                f"hoppings table {name!r} offset {key}: expected number or [re, im]"
            )
    return out


def parse_model_descriptor(desc: Mapping) -> TwoLevelModel:
    """Build a model from a descriptor dictionary (the JSON wire format).

    Builtin form::

        {"builtin": {"example": 3, "params": {"t0": 0.3, "t1": 0.5, "t2": 1.0}},
         "lambda": 0.4}

    Hoppings form::

        {"hoppings": {"rho": {"0": [0.0, 1.0]}, "sigma": {...},
                      "theta": {...}, "eta": {...}},
         "lambda": 0.4}

    For hoppings, ``lambda`` rescales the anti-Hermitian part extracted from
    the table (store gain/loss at unit strength to sweep it).
    """
    if not isinstance(desc, Mapping):
        raise InvalidModelError("model descriptor must be an object")
    lam = float(desc.get("lambda", 0.0))
    epsilon = float(desc.get("epsilon", 0.0))
    if "builtin" in desc:
        spec = desc["builtin"]
        if not isinstance(spec, Mapping) or "example" not in spec:
            raise InvalidModelError('"builtin" must be an object with an "example" field')
        return builtin_example(int(spec["example"]), spec.get("params"),
                               lam=lam, epsilon=epsilon)
    if "hoppings" in desc:
        tables = desc["hoppings"]
        if not isinstance(tables, Mapping):
            raise InvalidModelError('"hoppings" must be an object')
        missing = {"rho", "sigma", "theta", "eta"} - set(tables)
        if missing:
            raise InvalidModelError(f"hoppings descriptor missing tables: {sorted(missing)}")
        hops = LatticeHoppings(
            rho=_decode_table(tables["rho"], "rho"),
            sigma=_decode_table(tables["sigma"], "sigma"),
            theta_h=_decode_table(tables["theta"], "theta"),
            eta=_decode_table(tables["eta"], "eta"),
        )
        return bloch_from_hoppings(hops, lam=lam, epsilon=epsilon)
    raise InvalidModelError('model descriptor needs either a "builtin" or a "hoppings" entry')


def lattice_from_descriptor(desc: Mapping) -> LatticeHoppings:
    """Hopping tables from the same wire format accepted by parse_model_descriptor.

    The chain solvers work with the real-space tables directly rather than
    the Bloch reduction, so descriptors that carry (or name) hopping tables
    can feed both code paths.  ``lambda``/``epsilon`` entries are ignored
    here; gain/loss strength is applied by the solver that consumes the
    tables.
    """
    if not isinstance(desc, Mapping):
        raise InvalidModelError("model descriptor must be an object")
    if "builtin" in desc:
        spec = desc["builtin"]
        if not isinstance(spec, Mapping) or "example" not in spec:
            raise InvalidModelError('"builtin" must be an object with an "example" field')
        return builtin_lattice(int(spec["example"]), spec.get("params"))
    if "hoppings" in desc:
        tables = desc["hoppings"]
        if not isinstance(tables, Mapping):
            raise InvalidModelError('"hoppings" must be an object')
        missing = {"rho", "sigma", "theta", "eta"} - set(tables)
        if missing:
            raise InvalidModelError(f"hoppings descriptor missing tables: {sorted(missing)}")
        return LatticeHoppings(
            rho=_decode_table(tables["rho"], "rho"),
            sigma=_decode_table(tables["sigma"], "sigma"),
            theta_h=_decode_table(tables["theta"], "theta"),
            eta=_decode_table(tables["eta"], "eta"),
        )
    raise InvalidModelError('model descriptor needs either a "builtin" or a "hoppings" entry')
