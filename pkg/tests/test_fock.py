import math

import numpy as np
import pytest
from scipy.special import eval_hermite, factorial

from iondirac.core import make_grid, params_for_compton
from iondirac.fock import (
    TruncationError,
    TruncationWarning,
    build_hamiltonian,
    coherent_amplitudes,
    evolve_fock,
    fock_density_x,
    fock_from_field,
    fock_observables,
    fock_x_series,
    hermite_functions,
    initial_fock_state,
    ladder,
    momentum_operator,
    position_operator,
    truncation_check,
)
from iondirac.propagator import density_x, expect_p, expect_x, x_series
from iondirac.state_prep import PLUS_X, PLUS_Y, displace_momentum, fig1_state, gaussian_spinor


def test_canonical_commutator():
    n = 30
    x, p = position_operator(n), momentum_operator(n)
    np.testing.assert_allclose(x, x.conj().T)
    np.testing.assert_allclose(p, p.conj().T)
    comm = x @ p - p @ x
    # exact away from the truncation edge
    np.testing.assert_allclose(comm[: n - 1, : n - 1], 1j * np.eye(n - 1), atol=1e-12)
    a = ladder(n)
    np.testing.assert_allclose(np.diag(a.conj().T @ a), np.arange(n), atol=1e-12)


def test_hermite_functions_closed_form():
    # psi_n(x) = 2^(-1/4) phi_n(x/sqrt2), phi_n(u) = H_n(u) e^{-u^2/2} / sqrt(2^n n! sqrt(pi))
    x = np.linspace(-6, 6, 101)
    u = x / math.sqrt(2)
    ref = np.array([
        2**-0.25 * eval_hermite(n, u) * np.exp(-u * u / 2) / math.sqrt(2.0**n * factorial(n) * math.sqrt(math.pi))
        for n in range(12)
    ])
    np.testing.assert_allclose(hermite_functions(12, x), ref, atol=1e-12)


def test_hermite_functions_orthonormal_at_high_order():
    g = make_grid(4096, (-60.0, 60.0))
    psi = hermite_functions(400, g.x)
    gram = psi @ psi.T * g.dx
    np.testing.assert_allclose(gram, np.eye(400), atol=1e-10)


def test_coherent_state_moments():
    alpha = 1.3 - 0.4j
    st = initial_fock_state(PLUS_Y, alpha, 120)
    obs = fock_observables(st)
    assert obs.x == pytest.approx(2 * alpha.real)
    assert obs.p == pytest.approx(alpha.imag)
    assert obs.sigma_y == pytest.approx(1.0)
    pops = np.abs(coherent_amplitudes(alpha, 120)) ** 2
    nbar = abs(alpha) ** 2
    poisson = np.exp(-nbar) * nbar ** np.arange(20) / factorial(np.arange(20))
    np.testing.assert_allclose(pops[:20], poisson, atol=1e-14)


def test_initial_state_validation():
    with pytest.raises(ValueError):
        initial_fock_state([1, 1], "ground", 50)
    with pytest.raises(ValueError):
        initial_fock_state(PLUS_X, 10.0, 200)


def test_field_to_fock_ground_state(grid):
    st = fock_from_field(fig1_state(grid), 50)
    comps = st.components
    assert abs(comps[0, 0]) ** 2 + abs(comps[1, 0]) ** 2 == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(fock_density_x(st, grid.x), density_x(fig1_state(grid)), atol=1e-12)


def test_field_to_fock_moments(grid):
    s = displace_momentum(gaussian_spinor(PLUS_X, 1.5, 0, 1, grid), -0.7, "x")
    obs = fock_observables(fock_from_field(s, 200))
    assert obs.x == pytest.approx(expect_x(s), abs=1e-10)
    assert obs.p == pytest.approx(expect_p(s), abs=1e-10)


def test_engines_agree_short_time(grid):
    params = params_for_compton(1.2)
    s = fig1_state(grid)
    times = np.linspace(0, 60, 7)
    H = build_hamiltonian(200, params)
    xf = fock_x_series(fock_from_field(s, 200), times, H, strict=True)
    np.testing.assert_allclose(xf, x_series(s, times, params), atol=1e-9)


def test_fock_norm_and_hermiticity(lc12):
    H = build_hamiltonian(60, lc12)
    np.testing.assert_allclose(H.matrix, H.matrix.conj().T)
    st = initial_fock_state(PLUS_X, 0.5, 60)
    out = evolve_fock(st, 40.0, H)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_truncation_leak_detected(lc12):
    st = initial_fock_state(PLUS_X, 3.0, 40)
    H = build_hamiltonian(40, lc12)
    with pytest.raises(TruncationError):
        evolve_fock(st, 300.0, H, strict=True)
    with pytest.warns(TruncationWarning):
        out = evolve_fock(st, 300.0, H)
    assert truncation_check(out).leaking


def test_truncation_check_healthy():
    st = initial_fock_state(PLUS_X, "ground", 40)
    rep = truncation_check(st)
    assert rep.healthy and not rep.leaking and rep.status == "healthy"
