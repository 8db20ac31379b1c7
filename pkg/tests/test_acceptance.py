"""Acceptance gate: one test per promised capability, tolerances pinned.

Each test here states an end-to-end claim about the package (closed-form
oracle agreement, figure-level physics, ladder and dynamics behavior,
deterministic artifacts) and fails with the measured numbers when the claim
is not met.  Two claims are currently not met and are left failing on
purpose; the assertions document exactly how far the implementation gets.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from ptcycle import (
    SweepConfig,
    berry_connection,
    berry_phase,
    bloch_from_hoppings,
    builtin_example,
    builtin_lattice,
    critical_lambda,
    eigensystem,
    exact_example1,
    fig_preset,
    growth_rate,
    periodicity_report,
    quasi_energies,
    run_sweep,
    single_site_initial,
    evolve,
    ws_eigenstate,
    ws_spectrum,
)
from ptcycle.wannier_stark import _dense_eigenpairs
from helpers import random_model

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def fig1_rows(tmp_path_factory):
    """The 101-point smooth-transition sweep at drive 0.02, parsed."""
    csv_path = tmp_path_factory.mktemp("acc") / "fig1.csv"
    run_sweep(fig_preset(1), csv_path)
    rows = [line.split(",") for line in csv_path.read_text().splitlines()[1:]]
    lam = np.array([float(r[0]) for r in rows])
    mu = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    adiab = np.array([complex(float(r[5]), float(r[6])) for r in rows])
    return lam, mu, adiab


def test_quasi_energy_closed_form_oracle():
    # 48 strengths, two drives, against the rotating-frame closed form of
    # the constant-coupling model.  Currently red at the two grid points
    # nearest the critical strength for the faster drive: there the branch
    # anchor (the adiabatic estimate) has a real-part error above half a
    # rung and locks onto the neighboring branch.
    started = time.perf_counter()
    misses = []
    for omega in (0.02, 0.1):
        for lam in np.linspace(0.0, 2.0, 48):
            mu = quasi_energies(
                builtin_example(1, {"r0": 1.0}, lam=float(lam)), omega).mu_plus
            ref = exact_example1(1.0, float(lam), omega)[0]
            if abs(mu - ref) > 1e-8:
                misses.append((omega, float(lam), abs(mu - ref)))
    elapsed = time.perf_counter() - started
    assert elapsed <= 60.0, f"oracle comparison took {elapsed:.1f} s"
    assert not misses, "branch mismatches (omega, lambda, |diff|): " + ", ".join(
        f"({o}, {l:.4f}, {d:.3e})" for o, l, d in misses)


def test_smooth_transition_level_and_adiabatic_band(fig1_rows):
    lam, mu, adiab = fig1_rows
    at_half = mu[np.argmin(np.abs(lam - 0.5))]
    assert abs(at_half.imag - 0.0057735) <= 1e-6
    band = (lam <= 0.9) | (lam >= 1.1)
    rel = np.abs(adiab[band] - mu[band]) / np.abs(mu[band])
    assert not np.any(np.isnan(rel))
    assert np.max(rel) <= 0.05, f"worst adiabatic deviation {np.max(rel):.4f}"


def test_sharp_transition_thresholds():
    for lam in np.linspace(0.05, 0.45, 9):
        q = quasi_energies(builtin_example(2, lam=float(lam)), 0.02)
        assert abs(q.mu_plus.imag) <= 1e-7
        assert abs(q.mu_minus.imag) <= 1e-7
    for lam in np.linspace(0.55, 0.95, 9):
        q = quasi_energies(builtin_example(2, lam=float(lam)), 0.02)
        assert q.mu_plus.imag > 1e-3


def test_imperfect_transition_band_and_knee():
    omega = 0.02
    for lam in np.arange(0.05, 0.401, 0.05):
        model = builtin_example(3, lam=float(lam))
        level = quasi_energies(model, omega).mu_plus.imag
        predicted = omega / TWO_PI * berry_phase(model).gamma_plus.imag
        assert abs(level - predicted) <= 0.05 * abs(level)
    below = quasi_energies(builtin_example(3, lam=0.45), omega).mu_plus.imag
    above = quasi_energies(builtin_example(3, lam=0.55), omega).mu_plus.imag
    ratio = below / above
    # Currently red: the knee keeps sharpening as the drive slows (the
    # below-threshold level is itself proportional to the drive) and at
    # drive 0.02 the measured ratio is ~0.30; it reaches ~0.18 at 0.01 and
    # ~0.10 at 0.005.
    assert ratio < 0.2, f"knee ratio {ratio:.4f} at drive {omega}"


def test_berry_term_scales_linearly_with_drive():
    model = builtin_example(3, lam=0.25)
    ratio = (quasi_energies(model, 0.02).mu_plus.imag
             / quasi_energies(model, 0.01).mu_plus.imag)
    assert 1.94 <= ratio <= 2.06


def _integrated_phase(model, band):
    value, _ = quad(lambda k: berry_connection(model, k)[band, band],
                    0.0, TWO_PI, complex_func=True, limit=400,
                    epsabs=1e-11, epsrel=1e-11)
    return value


def _mod_2pi(x: float) -> float:
    return x - TWO_PI * round(x / TWO_PI)


def test_geometric_phase_properties():
    # both bands integrated independently: their phases cancel mod 2 pi
    cases = [
        builtin_example(1, {"r0": 1.0}, lam=0.5),
        builtin_example(1, {"r0": 1.0}, lam=1.5),
        builtin_example(2, lam=0.25),
        builtin_example(3, lam=0.25),
    ]
    for model in cases:
        total = _integrated_phase(model, 0) + _integrated_phase(model, 1)
        assert abs(_mod_2pi(total.real)) <= 1e-8
        assert abs(total.imag) <= 1e-8

    # real parts quantized to {0, pi} below the critical strength
    for which in (1, 2, 3):
        base = builtin_example(which)
        lam_c = critical_lambda(base)
        for frac in (0.3, 0.6, 0.9):
            res = berry_phase(base.with_lambda(frac * lam_c))
            folded = res.gamma_plus.real % TWO_PI
            dist = min(abs(folded - t) for t in (0.0, math.pi, TWO_PI))
            assert dist <= 1e-8

    # no coupling-phase winding, no geometric phase at all
    for lam in (0.1, 0.25, 0.45):
        res = berry_phase(builtin_example(2, lam=lam))
        assert abs(res.gamma_plus) <= 1e-10
        assert abs(res.gamma_minus) <= 1e-10

    # unit-winding constant coupling has the closed form
    # -pi + i*pi*lam/sqrt(1 - lam^2)
    for lam in (0.3, 0.5, 0.8):
        res = berry_phase(builtin_example(1, {"r0": 1.0}, lam=lam))
        want = complex(-math.pi, math.pi * lam / math.sqrt(1.0 - lam * lam))
        assert abs(res.gamma_plus - want) <= 1e-9


def test_connection_matches_finite_differences():
    rng = np.random.default_rng(2027)
    h = 1e-6
    for _ in range(10):
        model = random_model(rng)
        model = model.with_lambda(float(rng.uniform(0.1, 0.9)) * critical_lambda(model))
        for k in rng.uniform(0.0, TWO_PI, 32):
            analytic = berry_connection(model, k)
            plus = eigensystem(model, k + h)
            minus = eigensystem(model, k - h)
            mid = eigensystem(model, k)
            for i, v in enumerate((mid.v_plus, mid.v_minus)):
                for j, (up, um) in enumerate(((plus.u_plus, minus.u_plus),
                                              (plus.u_minus, minus.u_minus))):
                    fd = -1j * np.vdot(v, (up - um) / (2.0 * h))
                    assert abs(analytic[i, j] - fd) <= 1e-6


def test_ladder_against_dense_chain():
    # dense 240-cell oracle vs the rigid ladder; "bulk" levels are the ones
    # whose eigenvectors live in the middle third of the chain, away from
    # the open ends
    started = time.perf_counter()
    force = 0.02
    for which in (2, 3):
        hop = builtin_lattice(which)
        ladder = ws_spectrum(bloch_from_hoppings(hop, lam=0.25), force)
        mus = (ladder.quasi.mu_plus, ladder.quasi.mu_minus)
        values, vectors, sites = _dense_eigenpairs(hop, 0.25, force, 240)
        cell = np.concatenate([sites, sites])
        weight = np.abs(vectors) ** 2
        centers = (cell[:, None] * weight).sum(axis=0) / weight.sum(axis=0)
        bulk = values[np.abs(centers) <= len(sites) / 6.0]
        assert len(bulk) >= len(values) // 4
        for energy in bulk:
            scored = []
            for mu in mus:
                re = energy.real - mu.real
                fold = re - force * math.ceil(re / force - 0.5)
                scored.append((abs(fold) + abs(energy.imag - mu.imag), fold, mu))
            _, fold, mu = min(scored)
            assert abs(fold) <= 1e-3 * force
            if which == 3:
                assert abs(energy.imag - mu.imag) <= 0.10 * abs(mu.imag)
    assert time.perf_counter() - started <= 120.0


def test_eigenstate_tail_bound_on_both_sides():
    # algebraic 1/n envelope with one fixed constant, below and above the
    # critical strength of the sharp model
    for lam in (0.25, 0.75):
        for branch in ("+", "-"):
            state = ws_eigenstate(builtin_example(2, lam=lam), 0.02, branch,
                                  0, range(-220, 221))
            assert state.boundary_residual <= 1e-8
            amps = {n: max(abs(state.amplitudes_a[n]), abs(state.amplitudes_b[n]))
                    for n in state.amplitudes_a}
            peak = max(amps.values())
            for n, value in amps.items():
                if 20 <= abs(n) <= 200:
                    assert abs(n) * value <= 50.0 * peak


@pytest.fixture(scope="module")
def chain_runs():
    force = 0.1
    t1 = TWO_PI / force
    initial = single_site_initial(200)
    smooth = evolve(builtin_lattice(3), 0.25, force, initial,
                    112 * (t1 / 16.0), t1 / 16.0)
    sharp = evolve(builtin_lattice(2), 0.25, force, initial,
                   896 * (t1 / 160.0), t1 / 160.0)
    return force, smooth, sharp


def test_chain_periodicity_and_growth(chain_runs):
    force, smooth, sharp = chain_runs
    t1 = TWO_PI / force

    ladder3 = ws_spectrum(bloch_from_hoppings(builtin_lattice(3), lam=0.25), force)
    report3 = periodicity_report(smooth, force, ladder3.theta_shift)
    assert report3.classification == "Periodic-T1"
    gamma = berry_phase(builtin_example(3, lam=0.25)).gamma_plus
    target = force / TWO_PI * gamma.imag
    measured = growth_rate(smooth, t_start=report3.transient)
    assert abs(measured - target) <= 0.10 * abs(target)

    ladder2 = ws_spectrum(bloch_from_hoppings(builtin_lattice(2), lam=0.25), force)
    report2 = periodicity_report(sharp, force, ladder2.theta_shift)
    assert report2.classification == "Aperiodic"
    t2 = ladder2.t2_period
    assert min(abs(d - t1) / t1 for d in report2.detected_periods) <= 0.05
    assert min(abs(d - t2) / t2 for d in report2.detected_periods) <= 0.05


def test_sweep_bytes_thread_invariant(tmp_path):
    def config(threads):
        return SweepConfig(
            model={"builtin": {"example": 1, "params": {"r0": 1.0}}},
            axis="lambda", start=0.2, stop=1.8, count=21,
            omega=0.1, threads=threads)

    run_sweep(config(1), tmp_path / "serial.csv")
    run_sweep(config(8), tmp_path / "pooled.csv")
    assert ((tmp_path / "serial.csv").read_bytes()
            == (tmp_path / "pooled.csv").read_bytes())
