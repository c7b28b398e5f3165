"""Dirac-equation dynamics of a trapped ion.

Units: Delta (ground-state position spread) for length, us for time,
rad/us for frequencies, hbar = 1.
"""

from .analysis import SweepRow, ZbFit, ZbFitError, fit_zb, zb_sweep
from .core import (
    DiracParams,
    Grid,
    SpinorField,
    compton_wavelength,
    make_grid,
    params_for_compton,
    params_from_lab,
)
from .fock import TruncationError, build_hamiltonian, fock_from_field, fock_x_series, initial_fock_state
from .measurement import measure_x, reconstruct_density, sample_A, spinor_resolved_density
from .propagator import density_x, evolve, evolve_series, expect_p, expect_x, heisenberg_x, x_series
from .state_prep import (
    carrier_rotation,
    displace_momentum,
    gaussian_spinor,
    negative_energy_preparation,
    project_energy,
)

__version__ = "0.1.0"

__all__ = [
    "DiracParams", "Grid", "SpinorField", "SweepRow", "TruncationError", "ZbFit", "ZbFitError",
    "build_hamiltonian", "carrier_rotation", "compton_wavelength", "density_x", "displace_momentum",
    "evolve", "evolve_series", "expect_p", "expect_x", "fit_zb", "fock_from_field", "fock_x_series",
    "gaussian_spinor", "heisenberg_x", "initial_fock_state", "make_grid", "measure_x",
    "negative_energy_preparation", "params_for_compton", "params_from_lab", "project_energy",
    "reconstruct_density", "sample_A", "spinor_resolved_density", "x_series", "zb_sweep",
]
