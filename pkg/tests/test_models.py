import numpy as np
import pytest

from ptcycle import (
    InvalidModelError,
    LatticeHoppings,
    SymmetryError,
    bloch_from_hoppings,
    builtin_example,
    builtin_lattice,
    hamiltonian_at,
    parse_model_descriptor,
)
from helpers import random_model

SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_example1_hamiltonian_value():
    m = builtin_example(1, {"r0": 1.0}, lam=0.5)
    H = hamiltonian_at(m, np.pi / 2)
    expected = np.array([[0.5j, 1j], [-1j, -0.5j]])
    np.testing.assert_allclose(H, expected, atol=1e-14)


def test_example3_hermitian_limit_value():
    m = builtin_example(3, {"t0": 0.3, "t1": 0.5, "t2": 1.0}, lam=0.0)
    H = hamiltonian_at(m, 0.0)
    np.testing.assert_allclose(H, [[0.3, 1.5], [1.5, 0.3]], atol=1e-14)


def test_gain_loss_balance_symmetry():
    # sigma_x H(k)* sigma_x = H(k) for every builtin at eps = 0
    rng = np.random.default_rng(7)
    models = [builtin_example(i, lam=0.4) for i in (1, 2, 3)]
    models.append(random_model(rng, lam=0.8))
    for m in models:
        for k in rng.uniform(0, 2 * np.pi, 8):
            H = hamiltonian_at(m, k)
            np.testing.assert_allclose(SX @ H.conj() @ SX, H, atol=1e-13)


def test_hamiltonian_periodicity():
    m = builtin_example(3, lam=0.7)
    for k in (0.0, 1.1, 4.4):
        np.testing.assert_allclose(
            hamiltonian_at(m, k), hamiltonian_at(m, k + 2 * np.pi), atol=1e-12
        )


def test_phase_winding_of_builtins():
    assert builtin_example(1).phi_winding == 1
    assert builtin_example(2).phi_winding == 0
    # dimerized coupling winds only when the inter-cell hop dominates
    assert builtin_example(3, {"t0": 0.3, "t1": 0.5, "t2": 1.0}).phi_winding == 1
    assert builtin_example(3, {"t0": 0.3, "t1": 1.0, "t2": 0.5}).phi_winding == 0


def test_phi_lift_is_continuous():
    m = builtin_example(3)
    ks = np.linspace(-2 * np.pi, 4 * np.pi, 3000)
    phi = np.asarray(m.phi(ks))
    assert np.max(np.abs(np.diff(phi))) < 0.05
    np.testing.assert_allclose(m.phi(ks + 2 * np.pi), phi + 2 * np.pi, atol=1e-9)


def test_derivative_closures_match_finite_differences():
    rng = np.random.default_rng(21)
    h = 1e-6
    for m in [builtin_example(1, lam=0.3), builtin_example(2), builtin_example(3)]:
        for k in rng.uniform(0, 2 * np.pi, 6):
            for f, df in ((m.r, m.dr_at), (m.w, m.dw_at), (m.g, m.dg_at), (m.phi, m.dphi_at)):
                fd = (float(f(k + h)) - float(f(k - h))) / (2 * h)
                assert abs(float(df(k)) - fd) < 5e-9


# --- lattice hoppings ---

def test_lattice_reduction_matches_builtin_2():
    hops = builtin_lattice(2, {"t1": 1.0, "t2": 0.5})
    lat = bloch_from_hoppings(hops, lam=0.35)
    ref = builtin_example(2, {"t1": 1.0, "t2": 0.5}, lam=0.35)
    for k in np.linspace(0, 2 * np.pi, 40):
        np.testing.assert_allclose(
            hamiltonian_at(lat, k), hamiltonian_at(ref, k), atol=1e-12
        )


def test_lattice_reduction_matches_builtin_3():
    hops = builtin_lattice(3, {"t0": 0.3, "t1": 0.5, "t2": 1.0})
    lat = bloch_from_hoppings(hops, lam=0.2)
    ref = builtin_example(3, {"t0": 0.3, "t1": 0.5, "t2": 1.0}, lam=0.2)
    assert lat.phi_winding == ref.phi_winding == 1
    for k in np.linspace(0, 2 * np.pi, 40):
        np.testing.assert_allclose(
            hamiltonian_at(lat, k), hamiltonian_at(ref, k), atol=1e-12
        )
    # the phase lift itself agrees, not just the assembled matrix
    ks = np.linspace(0, 2 * np.pi, 97)
    np.testing.assert_allclose(np.asarray(lat.phi(ks)), np.asarray(ref.phi(ks)), atol=1e-9)


def test_lattice_reduction_derivatives():
    lat = bloch_from_hoppings(builtin_lattice(3), lam=0.2)
    h = 1e-6
    for k in (0.3, 2.0, 5.9):
        fd = (float(lat.phi(k + h)) - float(lat.phi(k - h))) / (2 * h)
        assert abs(float(lat.dphi_at(k)) - fd) < 1e-8
        fd = (float(lat.r(k + h)) - float(lat.r(k - h))) / (2 * h)
        assert abs(float(lat.dr_at(k)) - fd) < 1e-8


def test_unbalanced_hoppings_rejected():
    with pytest.raises(SymmetryError):
        LatticeHoppings(rho={0: 1j}, eta={0: -1j + 0.01}, sigma={0: 1.0}, theta_h={0: 1.0})
    with pytest.raises(SymmetryError):
        LatticeHoppings(rho={0: 1j}, eta={0: -1j}, sigma={1: 0.5}, theta_h={1: 0.5})


def test_balanced_hoppings_accepted():
    # complex cross-hops satisfying theta[-l] = conj(sigma[l])
    h = LatticeHoppings(
        rho={0: 0.2 + 1j, 1: 0.1j, -1: 0.1j},
        eta={0: 0.2 - 1j, 1: -0.1j, -1: -0.1j},
        sigma={0: 1.0, 1: 0.3 + 0.2j},
        theta_h={0: 1.0, -1: 0.3 - 0.2j},
    )
    assert h.max_range() == 1


# --- descriptors ---

def test_descriptor_builtin_roundtrip():
    desc = {"builtin": {"example": 3, "params": {"t0": 0.3, "t1": 0.5, "t2": 1.0}},
            "lambda": 0.4}
    m = parse_model_descriptor(desc)
    ref = builtin_example(3, lam=0.4)
    assert m.lam == 0.4
    for k in (0.0, 1.3, 3.7):
        np.testing.assert_allclose(hamiltonian_at(m, k), hamiltonian_at(ref, k), atol=1e-12)


def test_descriptor_hoppings_form():
    desc = {
        "hoppings": {
            "rho": {"0": [0.0, 1.0]},
            "eta": {"0": [0.0, -1.0]},
            "sigma": {"0": 1.0, "1": 0.25, "-1": 0.25},
            "theta": {"0": 1.0, "1": 0.25, "-1": 0.25},
        },
        "lambda": 0.3,
    }
    m = parse_model_descriptor(desc)
    ref = builtin_example(2, {"t1": 1.0, "t2": 0.5}, lam=0.3)
    for k in (0.2, 2.5):
        np.testing.assert_allclose(hamiltonian_at(m, k), hamiltonian_at(ref, k), atol=1e-12)


def test_descriptor_errors():
    with pytest.raises(InvalidModelError):
        parse_model_descriptor({"lambda": 0.1})
    with pytest.raises(InvalidModelError):
        parse_model_descriptor({"builtin": {"example": 9}})
    with pytest.raises(InvalidModelError):
        parse_model_descriptor({"hoppings": {"rho": {}, "sigma": {}}})
    with pytest.raises(InvalidModelError):
        builtin_example(2, {"t1": 0.5, "t2": 1.0})  # needs t1 > t2


def test_with_lambda_and_epsilon():
    m = builtin_example(1, lam=0.2)
    m2 = m.with_lambda(1.7).with_epsilon(1e-4)
    assert m2.lam == 1.7 and m2.epsilon == 1e-4
    assert m.lam == 0.2 and m.epsilon == 0.0
