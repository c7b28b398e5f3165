"""Reading out <x> and |psi(x)|^2 with internal-state probes.

After the internal state is reset to |+>_y, a short state-dependent probe
makes <sigma_z> proportional to <sin(kx)>. The slope at small k gives <x>.
Scanning k over both quadratures gives the characteristic function, whose
Fourier transform is the density.
"""

import numpy as np

from iondirac import gaussian_spinor, make_grid, measure_x, params_for_compton, reconstruct_density
from iondirac.propagator import density_x

grid = make_grid()
params = params_for_compton(1.2)
state = gaussian_spinor([1, 1], 1.2, 0.0, 1.0, grid)

x, err = measure_x(state, params)
print(f"noiseless estimate: {x:.4f} Delta (true 1.2)")
rng = np.random.default_rng(2010)
for shots in (1_000, 10_000, 30_000):
    x, err = measure_x(state, params, shots=shots, seed=rng)
    print(f"{shots:6d} shots per point: {x:.3f} +- {err:.3f} Delta")

rho = reconstruct_density(state, shots=10_000, seed=1)
l1 = np.sum(np.abs(rho - density_x(state))) * grid.dx
print(f"tomographic density, 10^4 shots per k: L1 error {l1:.3f}")
