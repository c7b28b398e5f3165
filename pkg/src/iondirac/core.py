"""Grids, parameters and the two-component field shared by both engines.

Units throughout the package: lengths in units of the trap ground-state
width (``Delta = 1``), ``hbar = 1``, times in microseconds, momenta in
``hbar/Delta`` and angular frequencies in rad/us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

#: Lamb-Dicke parameter of the axial mode.
ETA = 0.06
#: Sideband Rabi frequency of the bichromatic drive [rad/us].
OMEGA_TILDE = 2 * math.pi * 0.068
#: Probe Rabi frequency used for the <x> measurement [rad/us].
OMEGA_PROBE = 2 * math.pi * 0.013
#: Compton wavelengths of the four massive curves of the crossover figure [Delta].
COMPTON_WAVELENGTHS = (5.4, 2.5, 1.2, 0.6)

DEFAULT_N_POINTS = 4096
DEFAULT_EXTENT = (-60.0, 60.0)

Representation = Literal["position", "momentum"]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic position grid and its conjugate momentum grid.

    Position samples are ``x_min + j*dx`` for ``j = 0..n_points-1`` (the right
    edge ``x_max`` is excluded). Momentum samples follow numpy's wrapped FFT
    ordering, ``p = 2*pi*fftfreq(n_points, dx)``.
    """

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        if not _is_power_of_two(int(self.n_points)):
            raise ValueError(f"n_points must be a power of two, got {self.n_points}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid extent must be finite")
        if self.x_max <= self.x_min:
            raise ValueError(f"degenerate extent: x_max={self.x_max} <= x_min={self.x_min}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def dp(self) -> float:
        return 2 * math.pi / (self.n_points * self.dx)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def p(self) -> np.ndarray:
        return 2 * math.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def p_nyquist(self) -> float:
        return math.pi / self.dx

    def step(self, representation: Representation) -> float:
        return self.dx if representation == "position" else self.dp


def make_grid(n_points: int = DEFAULT_N_POINTS, x_extent=DEFAULT_EXTENT) -> Grid:
    """Build a :class:`Grid` from a point count and an ``(x_min, x_max)`` pair."""
    x_min, x_max = (float(v) for v in x_extent)
    return Grid(int(n_points), x_min, x_max)


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two-component wavefunction sampled on a :class:`Grid`.

    ``upper`` is the sigma_z = +1 component (internal state |0>), ``lower``
    the sigma_z = -1 component (|1>). Arrays are copied and frozen on
    construction.
    """

    grid: Grid
    upper: np.ndarray
    lower: np.ndarray
    representation: Representation = "position"

    def __post_init__(self):
        if self.representation not in ("position", "momentum"):
            raise ValueError(f"unknown representation {self.representation!r}")
        for name in ("upper", "lower"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.n_points,):
                raise ValueError(
                    f"{name} has shape {arr.shape}, expected ({self.grid.n_points},)"
                )
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_components(cls, grid: Grid, components, representation: Representation = "position"):
        components = np.asarray(components)
        return cls(grid, components[0], components[1], representation)

    @property
    def components(self) -> np.ndarray:
        """Array of shape ``(2, n_points)``; a fresh copy."""
        return np.stack([self.upper, self.lower])

    @property
    def step(self) -> float:
        return self.grid.step(self.representation)

    def norm(self) -> float:
        """Squared L2 norm, ``sum(|upper|^2 + |lower|^2) * step``."""
        return float(np.sum(np.abs(self.upper) ** 2 + np.abs(self.lower) ** 2) * self.step)

    def normalized(self) -> "SpinorField":
        n = self.norm()
        if n <= 0:
            raise ValueError("cannot normalize a zero field")
        s = 1 / math.sqrt(n)
        return SpinorField(self.grid, self.upper * s, self.lower * s, self.representation)

    def with_components(self, components, representation: Representation | None = None):
        rep = self.representation if representation is None else representation
        return SpinorField(self.grid, components[0], components[1], rep)


@dataclass(frozen=True)
class DiracParams:
    """Simulated Dirac parameters and the laboratory values they derive from.

    Attributes
    ----------
    c : float
        Simulated speed of light [Delta/us], equal to ``2*eta*omega_tilde``.
    mass_term : float
        Rest energy ``m c^2 / hbar`` [rad/us].
    eta, omega_tilde, omega_probe : float
        Lamb-Dicke parameter, sideband Rabi frequency and probe Rabi
        frequency [rad/us].
    """

    c: float
    mass_term: float
    eta: float = ETA
    omega_tilde: float = OMEGA_TILDE
    omega_probe: float = OMEGA_PROBE

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"speed of light must be positive, got {self.c}")
        if not self.mass_term >= 0:
            raise ValueError(f"mass term must be non-negative, got {self.mass_term}")

    @property
    def massless(self) -> bool:
        return self.mass_term == 0

    def with_mass(self, mass_term: float) -> "DiracParams":
        return params_from_lab(self.eta, self.omega_tilde, mass_term, self.omega_probe)


def params_from_lab(
    eta: float = ETA,
    omega_tilde: float = OMEGA_TILDE,
    Omega: float = 0.0,
    omega_probe: float = OMEGA_PROBE,
) -> DiracParams:
    """Map trap/laser parameters onto the simulated Dirac particle.

    ``c = 2*eta*omega_tilde`` (with Delta = 1) and ``mass_term = Omega``.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not omega_tilde > 0:
        raise ValueError(f"omega_tilde must be positive, got {omega_tilde}")
    if not Omega >= 0:
        raise ValueError(f"Omega must be non-negative, got {Omega}")
    if not omega_probe >= 0:
        raise ValueError(f"omega_probe must be non-negative, got {omega_probe}")
    return DiracParams(
        c=2 * eta * omega_tilde,
        mass_term=float(Omega),
        eta=float(eta),
        omega_tilde=float(omega_tilde),
        omega_probe=float(omega_probe),
    )


def params_for_compton(
    compton: float | None,
    eta: float = ETA,
    omega_tilde: float = OMEGA_TILDE,
    omega_probe: float = OMEGA_PROBE,
) -> DiracParams:
    """Parameters whose Compton wavelength ``c/Omega`` equals ``compton``.

    ``compton=None`` (or ``inf``) gives a massless particle.
    """
    c = 2 * eta * omega_tilde
    if compton is None or math.isinf(compton):
        Omega = 0.0
    elif compton <= 0:
        raise ValueError(f"Compton wavelength must be positive, got {compton}")
    else:
        Omega = c / compton
    return params_from_lab(eta, omega_tilde, Omega, omega_probe)


def compton_wavelength(params: DiracParams) -> float:
    """Compton wavelength ``c / Omega`` in units of Delta."""
    if params.mass_term <= 0:
        raise ValueError("Compton wavelength is undefined for a massless particle")
    return params.c / params.mass_term
