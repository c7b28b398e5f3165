"""Zitterbewegung across the relativistic crossover.

A packet at rest in the sigma_x = +1 spinor moves at the simulated speed of
light when the mass term is off. Switching the mass on makes part of the
packet negative-energy, and the interference shows up as a trembling of
<x> at roughly 2 Omega whose amplitude shrinks as the mass grows.
"""

import numpy as np

from iondirac import fit_zb, make_grid, params_for_compton, params_from_lab, x_series
from iondirac.state_prep import fig1_state

grid = make_grid()
state = fig1_state(grid)
times = np.arange(0.0, 251.0, 2.0)

massless = params_from_lab()
x0 = x_series(state, times, massless)
print(f"massless: <x>(250 us) = {x0[-1]:.3f} Delta, c * 250 us = {massless.c * 250:.3f} Delta")

print(f"{'lambda_C':>9} {'2 Omega':>9} {'omega_ZB':>9} {'R_ZB':>7} {'drift':>8}")
for lc in (2.5, 1.2, 0.6):
    p = params_for_compton(lc)
    fit = fit_zb(times, x_series(state, times, p), omega_seed=2 * p.mass_term)
    print(f"{lc:9.1f} {2 * p.mass_term:9.4f} {fit.omega_zb:9.4f} {fit.R_zb:7.3f} {fit.a:8.4f}")

# The light mass oscillates faster than 2 Omega here: the packet's momentum
# spread is comparable to Omega / c, so the relevant gap is 2 E(p), not 2 Omega.
