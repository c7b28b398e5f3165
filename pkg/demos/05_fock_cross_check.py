"""The same dynamics in the ion's own basis.

Writing x and p with ladder operators turns the Dirac Hamiltonian into a
Jaynes-Cummings-like coupling in a truncated Fock space. With enough levels
it reproduces the grid propagator to machine precision. With too few it
leaks population into the top levels, and the engine refuses to continue.
"""

import numpy as np

from iondirac import TruncationError, build_hamiltonian, fock_from_field, fock_x_series, make_grid, params_for_compton, x_series
from iondirac.state_prep import fig2_state

grid = make_grid()
params = params_for_compton(1.2)
state = fig2_state(grid)
times = np.arange(0.0, 151.0, 10.0)

for n_trunc in (400, 24):
    H = build_hamiltonian(n_trunc, params)
    try:
        xf = fock_x_series(fock_from_field(state, n_trunc), times, H, strict=True)
        diff = np.max(np.abs(xf - x_series(state, times, params)))
        print(f"n_trunc={n_trunc}: max |x_fock - x_grid| = {diff:.1e} Delta")
    except TruncationError as exc:
        print(f"n_trunc={n_trunc}: {exc}")
