import math

import numpy as np
import pytest

from iondirac.core import make_grid, params_for_compton
from iondirac.measurement import (
    DEFAULT_K_GRID,
    characteristic_function,
    expect_A,
    invert_characteristic,
    measure_x,
    probe_x_record,
    recombine,
    reconstruct_density,
    sample_A,
    slope_estimate,
    spinor_resolved_density,
)
from iondirac.propagator import density_x
from iondirac.state_prep import PLUS_X, PLUS_Y, carrier_rotation, gaussian_spinor


def test_sample_A_degenerate_and_stderr():
    assert sample_A(1.0, 100, 1) == (1.0, 0.0)
    assert sample_A(-1.0, 100, 1) == (-1.0, 0.0)
    est, err = sample_A(0.0, 10_000, 3)
    assert err == pytest.approx(0.01, rel=1e-3)
    assert err == pytest.approx(math.sqrt((1 - est**2) / 10_000))
    with pytest.raises(ValueError):
        sample_A(1.5, 10, 0)
    with pytest.raises(ValueError):
        sample_A(0.2, 0, 0)


def test_sample_A_unbiased_and_reproducible():
    rng = np.random.default_rng(11)
    ests = np.array([sample_A(0.3, 1000, rng)[0] for _ in range(4000)])
    # binomial mean and variance of 2 n/N - 1
    assert ests.mean() == pytest.approx(0.3, abs=4 * math.sqrt(0.91 / 1000 / 4000))
    assert ests.var() == pytest.approx(0.91 / 1000, rel=0.1)
    assert sample_A(0.3, 1000, 5) == sample_A(0.3, 1000, 5)


def test_recombine_weights(grid):
    s = gaussian_spinor([0.6, 0.8], 1.0, 0, 1, grid)
    ens = recombine(s)
    assert sorted(ens.weights) == pytest.approx([0.36, 0.64])
    assert ens.expect(lambda x: x) == pytest.approx(1.0)


def test_expect_A_gaussian_closed_form(grid):
    # <sin kx> of a Gaussian is exp(-k^2 sigma^2 / 2) sin(k x0)
    x0, sigma = 1.7, 1.2
    ens = recombine(gaussian_spinor(PLUS_X, x0, 0.3, sigma, grid))
    k = np.linspace(-1.5, 1.5, 13)
    np.testing.assert_allclose(expect_A(ens, k), np.exp(-k * k * sigma**2 / 2) * np.sin(k * x0), atol=1e-12)
    assert expect_A(ens, 0.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        expect_A(ens, 2 * grid.p_nyquist)


def test_measure_x_symmetric_packet(grid, lc12):
    x, err = measure_x(gaussian_spinor(PLUS_X, 0, 0, 1, grid), lc12)
    assert x == pytest.approx(0.0, abs=1e-12)
    x, err = measure_x(gaussian_spinor(PLUS_X, 0, 0, 1, grid), lc12, shots=10_000, seed=4)
    assert abs(x) < 5 * err


@pytest.mark.parametrize("x0", [-2.0, -0.5, 0.8, 2.0])
def test_measure_x_bias_small(grid, lc12, x0):
    x, _ = measure_x(gaussian_spinor([1, 1j], x0, 0, 1, grid), lc12)
    assert x == pytest.approx(x0, rel=0.02)


def test_probe_record_requires_seed(grid, lc12):
    s = gaussian_spinor(PLUS_X, 0.5, 0, 1, grid)
    with pytest.raises(ValueError):
        probe_x_record(s, lc12, shots=100)
    rec = probe_x_record(s, lc12, shots=100, seed=0)
    assert set(rec.columns()) == {"t[us]", "k[1/Delta]", "A", "stderr"}
    assert np.all(np.abs(rec.estimates) <= 1)
    np.testing.assert_allclose(rec.stderr, np.sqrt((1 - rec.estimates**2) / 100))
    with pytest.raises(ValueError):
        measure_x(s, lc12, times=[0, 1])


def test_probe_warns_outside_linear_regime(grid, lc12):
    with pytest.warns(RuntimeWarning):
        probe_x_record(gaussian_spinor(PLUS_X, 10.0, 0, 1, grid), lc12)


def test_stderr_scales_inverse_sqrt_shots(grid, lc12):
    s = gaussian_spinor(PLUS_X, 1.0, 0, 1, grid)
    spread = []
    shots_list = (1_000, 10_000, 100_000)
    for shots in shots_list:
        rng = np.random.default_rng(shots)
        xs = [measure_x(s, lc12, shots=shots, seed=rng)[0] for _ in range(100)]
        spread.append(np.std(xs, ddof=1))
    slope = np.polyfit(np.log(shots_list), np.log(spread), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_characteristic_function_gaussian(grid):
    x0, sigma = -1.0, 1.0
    ens = recombine(gaussian_spinor(PLUS_X, x0, 0, sigma, grid))
    k = np.asarray(DEFAULT_K_GRID)
    F = characteristic_function(ens, k)
    np.testing.assert_allclose(F, np.exp(1j * k * x0 - k * k * sigma**2 / 2), atol=1e-12)
    np.testing.assert_allclose(F, np.conj(F[::-1]), atol=0)


def test_k_grid_validation(grid):
    ens = recombine(gaussian_spinor(PLUS_X, 0, 0, 1, grid))
    for bad in ([0, 1, 2], [-1, 0.5, 1], np.linspace(-1, 1, 4)):
        with pytest.raises(ValueError):
            characteristic_function(ens, bad)


def test_reconstruction_close_to_density(grid):
    s = gaussian_spinor(PLUS_X, 0.5, 0, 1, grid)
    rho = reconstruct_density(s)
    assert np.sum(np.abs(rho - density_x(s))) * grid.dx < 0.05
    assert np.sum(rho) * grid.dx == pytest.approx(1.0)
    assert np.all(rho >= 0)


def test_reconstruction_with_shots_is_seeded(grid):
    s = gaussian_spinor(PLUS_X, 0.5, 0, 1, grid)
    a = reconstruct_density(s, shots=10_000, seed=9)
    b = reconstruct_density(s, shots=10_000, seed=9)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        reconstruct_density(s, shots=100)


def test_inconsistent_characteristic_raises(grid):
    k = np.linspace(-3, 3, 61)
    F = np.where(np.abs(k) < 1e-12, 1.0, -1.0).astype(complex)
    with pytest.raises(ValueError):
        invert_characteristic(F, k, grid)
    with pytest.raises(ValueError):
        invert_characteristic(np.ones(61), k, grid, window="kaiser")


def test_spinor_resolved_density(grid):
    up = gaussian_spinor([1, 0], -2.0, 0, 1, grid).components[0]
    lo = gaussian_spinor([1, 0], 3.0, 0, 1, grid).components[0]
    s = gaussian_spinor([1, 0], 0, 0, 1, grid).with_components((0.6 * up, 0.8 * lo))
    w0, d0 = spinor_resolved_density(s, 0)
    w1, d1 = spinor_resolved_density(s, 1)
    assert (w0, w1) == pytest.approx((0.36, 0.64))
    np.testing.assert_allclose(d0, np.abs(up) ** 2, atol=1e-14)
    np.testing.assert_allclose(d1, np.abs(lo) ** 2, atol=1e-14)
    w1t, d1t = spinor_resolved_density(s, 1, k_grid=DEFAULT_K_GRID)
    assert np.sum(np.abs(d1t - d1)) * grid.dx < 0.05
    assert spinor_resolved_density(gaussian_spinor([1, 0], 0, 0, 1, grid), 1) [0] == 0.0
