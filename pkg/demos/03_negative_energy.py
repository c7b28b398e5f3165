"""Preparing a pure negative-energy packet.

The pulse sequence is a sigma_y kick, a Stark phase, a small second kick and
a pi/2 carrier pulse. Its output overlaps the exactly projected negative-energy
state almost perfectly, and a packet without a positive-energy partner has
nothing to interfere with, so <x> drifts without trembling.
"""

import numpy as np

from iondirac import fit_zb, make_grid, negative_energy_preparation, params_for_compton, x_series
from iondirac.propagator import expect_p

grid = make_grid()
params = params_for_compton(1.2)
prep = negative_energy_preparation(params, grid)
print(f"overlap^2 with target: {prep.overlap_sq:.4f}")
print(f"kicks: {prep.first_kick:+.3f} ({prep.first_kick_duration:.1f} us), {prep.second_kick:+.4f} ({prep.second_kick_duration:.1f} us)")
print(f"<p> = {expect_p(prep.state):.3f} hbar/Delta")

times = np.arange(0.0, 151.0, 1.0)
fit = fit_zb(times, x_series(prep.state, times, params), omega_seed=2 * params.mass_term)
print(f"drift {fit.a:+.4f} Delta/us (moving against its momentum), R_ZB = {fit.R_zb:.1e} Delta")
