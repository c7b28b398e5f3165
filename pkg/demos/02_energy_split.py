"""A kicked packet splits into its positive- and negative-energy parts.

With <p> = 1 hbar/Delta the two energy branches travel apart with opposite
group velocities. Once they no longer overlap the Zitterbewegung, which is
their interference, dies out.
"""

import numpy as np

from iondirac import make_grid, params_for_compton, project_energy, x_series
from iondirac.analysis import detrended_amplitude
from iondirac.state_prep import fig2_state

grid = make_grid()
params = params_for_compton(1.2)
state = fig2_state(grid, momentum=1.0)
times = np.arange(0.0, 151.0, 1.0)

x = x_series(state, times, params)
plus, w_plus = project_energy(state, params, +1)
minus, w_minus = project_energy(state, params, -1)
x_plus, x_minus = x_series(plus, times, params), x_series(minus, times, params)

print(f"energy weights: +{w_plus:.3f} / -{w_minus:.3f}")
print(f"<x>(150 us) = {x[-1]:.2f}; branches at {x_plus[-1]:.2f} and {x_minus[-1]:.2f} Delta")
early = detrended_amplitude(times, x, 0, 50)
late = detrended_amplitude(times, x, 100, 150)
print(f"oscillation amplitude 0-50 us: {early:.3f}, 100-150 us: {late:.3f} (ratio {late / early:.2f})")
