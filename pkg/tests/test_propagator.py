import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from iondirac.core import make_grid, params_for_compton, params_from_lab
from iondirac.propagator import (
    PAULI,
    as_momentum,
    density_p,
    density_x,
    evolve,
    expect_energy,
    expect_p,
    expect_pauli,
    expect_x,
    expect_x2,
    heisenberg_x,
    heisenberg_x_series,
    _propagate_modes,
    mode_hamiltonian,
    to_momentum,
    to_position,
    x_series,
)
from iondirac.state_prep import PLUS_X, gaussian_spinor

seeds = st.integers(0, 2**31 - 1)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_fft_round_trip_is_unitary(small_grid, seed):
    s = random_state(small_grid, np.random.default_rng(seed))
    m = to_momentum(s)
    assert m.norm() == pytest.approx(1.0, abs=1e-12)
    back = to_position(m)
    np.testing.assert_allclose(back.components, s.components, atol=1e-12)


def test_wrong_representation_raises(small_grid):
    s = gaussian_spinor(PLUS_X, 0, 0, 1, small_grid)
    with pytest.raises(ValueError):
        to_position(s)
    with pytest.raises(ValueError):
        to_momentum(to_momentum(s))


def test_gaussian_momentum_density_matches_closed_form(grid):
    # |psi(p)|^2 of a width-sigma packet is Gaussian with std 1/(2 sigma)
    sigma, p0 = 1.5, 0.7
    s = gaussian_spinor(PLUS_X, 2.0, p0, sigma, grid)
    sp = 1 / (2 * sigma)
    exact = np.exp(-((grid.p - p0) ** 2) / (2 * sp * sp)) / math.sqrt(2 * math.pi * sp * sp)
    np.testing.assert_allclose(density_p(s), exact, atol=1e-10)
    assert expect_p(s) == pytest.approx(p0, abs=1e-12)
    assert expect_x(s) == pytest.approx(2.0, abs=1e-12)
    assert expect_x2(s) - expect_x(s) ** 2 == pytest.approx(sigma**2, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-8, 8), st.floats(0, 0.3), st.floats(-50, 50))
def test_mode_propagator_matches_expm(p, mass, t):
    params = params_from_lab(Omega=mass)
    H = mode_hamiltonian(np.array([p]), params)[0]
    a, b = _propagate_modes(np.array([1.0 + 0j]), np.array([0.3j]), np.array([p]), t, params)
    ref = scipy.linalg.expm(-1j * H * t) @ np.array([1.0, 0.3j])
    np.testing.assert_allclose([a[0], b[0]], ref, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds, st.floats(0, 200), st.floats(0, 200))
def test_evolution_is_a_unitary_group(small_grid, seed, t1, t2):
    params = params_for_compton(1.2)
    s = random_state(small_grid, np.random.default_rng(seed))
    a = evolve(evolve(s, t1, params), t2, params)
    b = evolve(s, t1 + t2, params)
    np.testing.assert_allclose(a.components, b.components, atol=1e-10)
    assert a.norm() == pytest.approx(1.0, abs=1e-12)


def test_evolve_zero_time_and_representation(grid, lc12):
    s = gaussian_spinor(PLUS_X, 0, 0, 1, grid)
    np.testing.assert_allclose(evolve(s, 0.0, lc12).components, s.components, atol=1e-13)
    m = evolve(as_momentum(s), 10.0, lc12)
    assert m.representation == "momentum"


def test_massless_sigma_x_eigenstate_moves_rigidly(grid, massless):
    # H = c p sigma_x: the +1 branch translates at +c without distortion
    s = gaussian_spinor(PLUS_X, 0, 0, 1, grid)
    t = 100.0
    out = evolve(s, t, massless)
    shifted = gaussian_spinor(PLUS_X, massless.c * t, 0, 1, grid)
    np.testing.assert_allclose(density_x(out), density_x(shifted), atol=1e-10)
    np.testing.assert_allclose(x_series(s, [0, 50, 100], massless), massless.c * np.array([0, 50, 100]), atol=1e-10)


def test_zitterbewegung_of_broad_packet(lc12):
    # for p -> 0: d<x>/dt = c cos(2 Omega t), so <x> = c sin(2 Omega t) / (2 Omega)
    g = make_grid(8192, (-400.0, 400.0))
    s = gaussian_spinor(PLUS_X, 0, 0, 40.0, g)
    times = np.linspace(0, 150, 16)
    exact = lc12.c * np.sin(2 * lc12.mass_term * times) / (2 * lc12.mass_term)
    np.testing.assert_allclose(x_series(s, times, lc12), exact, atol=0.005 * lc12.c / (2 * lc12.mass_term))


def test_energy_of_kicked_spinor(grid, lc12):
    # <H> = c <p sigma_x> + Omega <sigma_z>; for a sigma_x = +1 spinor this is c p0
    s = gaussian_spinor(PLUS_X, 0, 0.4, 1, grid)
    assert expect_energy(s, lc12) == pytest.approx(lc12.c * 0.4, rel=1e-10)
    up = gaussian_spinor([1, 0], 0, 0.4, 1, grid)
    assert expect_energy(up, lc12) == pytest.approx(lc12.mass_term, rel=1e-10)
    assert expect_pauli(up, "z") == pytest.approx(1.0)
    assert expect_pauli(s, "x") == pytest.approx(1.0)
    assert expect_pauli(s, "y") == pytest.approx(0.0, abs=1e-14)


def test_expectations_reject_unnormalized(small_grid):
    s = gaussian_spinor(PLUS_X, 0, 0, 1, small_grid)
    bad = s.with_components(2 * s.components)
    with pytest.raises(ValueError):
        expect_x(bad)


@settings(max_examples=10, deadline=None)
@given(seeds, st.sampled_from([5.4, 2.5, 1.2, 0.6]), st.floats(0, 300))
def test_heisenberg_oracle_matches_evolution(grid, seed, lc, t):
    params = params_for_compton(lc)
    s = random_state(grid, np.random.default_rng(seed))
    assert heisenberg_x(s, t, params) == pytest.approx(expect_x(evolve(s, t, params)), abs=1e-8)


def test_heisenberg_oracle_refuses_massless_zero_mode(grid, massless):
    s = gaussian_spinor(PLUS_X, 0, 0, 1, grid)
    with pytest.raises(ValueError):
        heisenberg_x_series(s, [0, 10], massless)


def test_pauli_table():
    for k, m in PAULI.items():
        np.testing.assert_allclose(m @ m, np.eye(2))
    np.testing.assert_allclose(PAULI["x"] @ PAULI["y"], 1j * PAULI["z"])
