"""Initial-state construction.

Gaussian packets, internal-state pulses, state-dependent momentum kicks,
projectors onto positive/negative energy, and the pulse sequence that
approximates a negative-energy wavepacket.

Conventions
-----------
* ``carrier_rotation(theta, phi)`` applies ``exp(-i theta/2 (cos phi sx + sin phi sy))``.
* ``stark_rotation(phi)`` applies ``exp(-i phi/2 sz)`` (a far-detuned pulse).
* ``displace_momentum(kappa, axis)`` applies ``exp(-i kappa x s_axis)``: the
  ``+1`` eigenbranch of ``s_axis`` is kicked by ``-kappa``, the ``-1`` branch
  by ``+kappa``. A kick of duration ``t`` under ``eta*omega_tilde*s_axis*x``
  has ``kappa = eta*omega_tilde*t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DiracParams, Grid, SpinorField, make_grid, params_for_compton
from .propagator import (
    PAULI,
    ZERO_MODE_WEIGHT,
    as_momentum,
    as_position,
    as_representation,
    mode_energy,
    mode_hamiltonian,
)

PLUS_Y = np.array([1, 1j]) / math.sqrt(2)
MINUS_Y = np.array([1, -1j]) / math.sqrt(2)
PLUS_X = np.array([1, 1]) / math.sqrt(2)

# fraction of the momentum band next to the Nyquist edge that must stay empty
_EDGE_BAND = 0.1
_CLIP_TOLERANCE = 1e-10


def _normalize_spinor(spinor) -> np.ndarray:
    s = np.asarray(spinor, dtype=complex).reshape(2)
    n = np.linalg.norm(s)
    if n == 0:
        raise ValueError("spinor must be nonzero")
    return s / n


def _edge_mass(state: SpinorField) -> float:
    mom = as_momentum(state)
    g = mom.grid
    edge = np.abs(g.p) > (1 - _EDGE_BAND) * g.p_nyquist
    dens = np.abs(mom.upper[edge]) ** 2 + np.abs(mom.lower[edge]) ** 2
    return float(np.sum(dens) * g.dp)


def gaussian_spinor(spinor, x0: float, p0: float, width: float, grid: Grid) -> SpinorField:
    """Normalized packet ``exp(-(x-x0)^2 / (4 width^2) + i p0 x)`` times a spinor.

    ``width`` is the position standard deviation; ``width = 1`` is the trap
    ground state.
    """
    chi = _normalize_spinor(spinor)
    if width <= 2 * grid.dx:
        raise ValueError(f"width {width} is not resolved by grid spacing {grid.dx:.4g}")
    x = grid.x
    env = (2 * math.pi * width**2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * width**2) + 1j * p0 * x)
    mass = float(np.sum(np.abs(env) ** 2) * grid.dx)
    if abs(1 - mass) > _CLIP_TOLERANCE:
        raise ValueError(f"packet at x0={x0} with width {width} is clipped by the grid (mass {mass:.12g})")
    state = SpinorField(grid, chi[0] * env, chi[1] * env).normalized()
    if _edge_mass(state) > _CLIP_TOLERANCE:
        raise ValueError(f"momentum p0={p0} is too close to the grid Nyquist limit")
    return state


def ground_state(grid: Grid, spinor=PLUS_X) -> SpinorField:
    """Trap ground state times ``spinor``; the default is the (1, 1)/sqrt(2) spinor."""
    return gaussian_spinor(spinor, 0.0, 0.0, 1.0, grid)


def _apply_spinor_matrix(state: SpinorField, U) -> SpinorField:
    comps = np.einsum("ij,jn->in", U, state.components)
    return state.with_components(comps)


def carrier_rotation(state: SpinorField, theta: float, axis_phi: float = 0.0) -> SpinorField:
    """Resonant pulse of area ``theta`` about the equatorial axis at angle ``axis_phi``."""
    n = math.cos(axis_phi) * PAULI["x"] + math.sin(axis_phi) * PAULI["y"]
    U = math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * n
    return _apply_spinor_matrix(state, U)


def stark_rotation(state: SpinorField, phi: float) -> SpinorField:
    """Rotation about z, ``exp(-i phi sigma_z / 2)``."""
    U = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    return _apply_spinor_matrix(state, U)


def displace_momentum(state: SpinorField, kappa: float, pauli_axis: str = "x") -> SpinorField:
    """State-dependent kick ``exp(-i kappa x sigma_axis)``."""
    if pauli_axis not in ("x", "y"):
        raise ValueError(f"pauli_axis must be 'x' or 'y', got {pauli_axis!r}")
    rep = state.representation
    pos = as_position(state)
    kx = kappa * pos.grid.x
    S = PAULI[pauli_axis]
    u, v = pos.upper, pos.lower
    cos, sin = np.cos(kx), np.sin(kx)
    u2 = cos * u - 1j * sin * (S[0, 0] * u + S[0, 1] * v)
    v2 = cos * v - 1j * sin * (S[1, 0] * u + S[1, 1] * v)
    out = pos.with_components((u2, v2))
    if _edge_mass(out) > _CLIP_TOLERANCE:
        raise ValueError(f"kick kappa={kappa} pushes the state onto the momentum grid edge")
    return as_representation(out, rep)


def kick_duration(kappa: float, params: DiracParams) -> float:
    """Pulse length (us) producing a kick of magnitude ``|kappa|``."""
    return abs(kappa) / (params.eta * params.omega_tilde)


def energy_projector(p, params: DiracParams, sign: int) -> np.ndarray:
    """``P(p) = (I + sign * H(p)/E(p)) / 2`` per mode, shape ``p.shape + (2, 2)``.

    On an ``E = 0`` mode (massless, ``p = 0``) the projector is undefined and
    ``I/2`` is returned; :func:`project_energy` refuses states with weight there.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    p = np.asarray(p, dtype=float)
    E = mode_energy(p, params)
    H = mode_hamiltonian(p, params)
    safe = np.where(E > 0, E, 1.0)
    unit = H / safe[..., None, None]
    unit[E == 0] = 0
    return 0.5 * (np.eye(2) + sign * unit)


def project_energy(state: SpinorField, params: DiracParams, sign: int) -> tuple[SpinorField, float]:
    """Project onto the positive (``sign=+1``) or negative (``-1``) energy subspace.

    Returns the renormalized projected state (in the caller's representation)
    and the weight ``||P psi||^2`` before renormalization.
    """
    rep = state.representation
    mom = as_momentum(state)
    g = mom.grid
    E = mode_energy(g.p, params)
    zero = E == 0
    if np.any(zero):
        w0 = float(np.sum(np.abs(mom.upper[zero]) ** 2 + np.abs(mom.lower[zero]) ** 2) * g.dp)
        if w0 > ZERO_MODE_WEIGHT:
            raise ValueError("energy sign is undefined at p = 0 for a massless particle")
    P = energy_projector(g.p, params, sign)
    comps = np.einsum("nij,jn->in", P, mom.components)
    out = mom.with_components(comps)
    weight = out.norm()
    if weight < 1e-12:
        raise ValueError(f"empty projection (weight {weight:.3g})")
    return as_representation(out.normalized(), rep), weight


def overlap(a: SpinorField, b: SpinorField) -> complex:
    """Inner product ``<a|b>`` over both components."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.representation != b.representation:
        raise ValueError("fields are in different representations")
    return complex(np.sum(np.conj(a.components) * b.components) * a.step)


def negative_energy_spinor(p: float, params: DiracParams) -> np.ndarray:
    """Normalized eigenvector of ``H(p)`` with eigenvalue ``-E(p)``."""
    E = float(mode_energy(p, params))
    if E == 0:
        raise ValueError("no energy gap at this momentum")
    v = np.array([params.c * p, -(E + params.mass_term)], dtype=complex)
    return v / np.linalg.norm(v)


def negative_energy_target(params: DiracParams, grid: Grid, momentum: float = 2.2) -> SpinorField:
    """Negative-energy part of a ground-width packet at mean momentum ``momentum``.

    The packet carries the negative-energy spinor of its central momentum
    before projection; the result is renormalized.
    """
    packet = gaussian_spinor(negative_energy_spinor(momentum, params), 0.0, momentum, 1.0, grid)
    state, _ = project_energy(packet, params, -1)
    return state


@dataclass(frozen=True)
class NegativeEnergyPrep:
    state: SpinorField
    target: SpinorField
    overlap_sq: float
    first_kick: float
    stark_angle: float
    second_kick: float
    first_kick_duration: float
    second_kick_duration: float


def _sequence(grid, momentum, amplitudes, second_kick):
    a, b = amplitudes
    s = gaussian_spinor(PLUS_Y, 0.0, 0.0, 1.0, grid)
    s = displace_momentum(s, -momentum, "y")
    # |+y> -> a|+y> - i b|-y>
    phi = 2 * math.atan2(b, a)
    s = stark_rotation(s, phi)
    s = displace_momentum(s, second_kick, "y")
    s = carrier_rotation(s, math.pi / 2, math.pi)
    return s, phi


def negative_energy_preparation(
    params: DiracParams | None = None,
    grid: Grid | None = None,
    momentum: float = 2.2,
    amplitudes=(0.84, 0.53),
    second_kick: float | None = None,
) -> NegativeEnergyPrep:
    """Run the five-step pulse sequence approximating a negative-energy packet.

    1. ground state with internal ``|+>_y``;
    2. sigma_y kick to mean momentum ``momentum``;
    3. far-detuned (sigma_z) pulse to ``a|+>_y - i b|->_y`` (amplitudes renormalized);
    4. opposite sigma_y kick of magnitude ``second_kick`` splitting the branches;
    5. pi/2 pulse about -x.

    ``second_kick=None`` chooses the kick maximizing overlap with
    :func:`negative_energy_target`.
    """
    params = params_for_compton(1.2) if params is None else params
    grid = make_grid() if grid is None else grid
    target = negative_energy_target(params, grid, momentum)

    def ov2(k):
        s, _ = _sequence(grid, momentum, amplitudes, k)
        return abs(overlap(target, s)) ** 2

    if second_kick is None:
        direction = math.copysign(1.0, momentum)
        scan = direction * np.linspace(0.0, 1.0, 41)
        best = scan[int(np.argmax([ov2(k) for k in scan]))]
        step = scan[1] - scan[0]
        lo, hi = sorted((best - step, best + step))
        res = minimize_scalar(lambda k: -ov2(k), bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
        second_kick = float(res.x)
    state, phi = _sequence(grid, momentum, amplitudes, second_kick)
    return NegativeEnergyPrep(
        state=state,
        target=target,
        overlap_sq=abs(overlap(target, state)) ** 2,
        first_kick=-momentum,
        stark_angle=phi,
        second_kick=second_kick,
        first_kick_duration=kick_duration(momentum, params),
        second_kick_duration=kick_duration(second_kick, params),
    )


def negative_energy_sequence(params: DiracParams | None = None, grid: Grid | None = None, **kwargs) -> SpinorField:
    """Output state of :func:`negative_energy_preparation`."""
    return negative_energy_preparation(params, grid, **kwargs).state


def fig1_state(grid: Grid) -> SpinorField:
    """Ground-state packet with spinor (1, 1)/sqrt(2)."""
    return ground_state(grid, PLUS_X)


def fig2_state(grid: Grid, momentum: float = 1.0) -> SpinorField:
    """Ground-state packet (1, 1)/sqrt(2) given mean momentum by a sigma_x kick."""
    return displace_momentum(fig1_state(grid), -momentum, "x")

