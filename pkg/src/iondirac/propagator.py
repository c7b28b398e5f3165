"""Exact spectral propagation of the free 1+1D Dirac equation.

The Hamiltonian ``H = c p sigma_x + Omega sigma_z`` is diagonal in momentum,
so each Fourier mode is evolved with the closed-form 2x2 exponential

    exp(-i H t) = cos(E t) I - i sin(E t) H / E,   E = sqrt(c^2 p^2 + Omega^2).

Fourier convention: unitary, angular frequency,
``psi(p) = (2 pi)^(-1/2) int psi(x) exp(-i p x) dx``, evaluated with numpy's
FFT on the wrapped momentum grid of :class:`~iondirac.core.Grid`.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DiracParams, SpinorField

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

NORM_TOLERANCE = 1e-6
# a p = 0 mode carrying more probability than this blocks the Heisenberg oracle at Omega = 0
ZERO_MODE_WEIGHT = 1e-14


def _fft_phase(grid) -> np.ndarray:
    return np.exp(-1j * grid.p * grid.x_min)


def to_momentum(state: SpinorField) -> SpinorField:
    """Position -> momentum representation."""
    if state.representation != "position":
        raise ValueError("to_momentum expects a position-representation field")
    g = state.grid
    factor = g.dx / math.sqrt(2 * math.pi) * _fft_phase(g)
    comps = factor * np.fft.fft(state.components, axis=-1)
    return state.with_components(comps, "momentum")


def to_position(state: SpinorField) -> SpinorField:
    """Momentum -> position representation."""
    if state.representation != "momentum":
        raise ValueError("to_position expects a momentum-representation field")
    g = state.grid
    factor = g.dp * g.n_points / math.sqrt(2 * math.pi)
    comps = factor * np.fft.ifft(state.components * np.conj(_fft_phase(g)), axis=-1)
    return state.with_components(comps, "position")


def as_momentum(state: SpinorField) -> SpinorField:
    return state if state.representation == "momentum" else to_momentum(state)


def as_position(state: SpinorField) -> SpinorField:
    return state if state.representation == "position" else to_position(state)


def as_representation(state: SpinorField, representation) -> SpinorField:
    return as_position(state) if representation == "position" else as_momentum(state)


def mode_energy(p, params: DiracParams) -> np.ndarray:
    """Energy magnitude ``sqrt(c^2 p^2 + Omega^2)`` of each momentum mode."""
    p = np.asarray(p, dtype=float)
    return np.hypot(params.c * p, params.mass_term)


def mode_hamiltonian(p, params: DiracParams) -> np.ndarray:
    """Per-mode Dirac Hamiltonians, shape ``p.shape + (2, 2)``."""
    p = np.asarray(p, dtype=float)
    cp = params.c * p
    H = np.zeros(p.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = params.mass_term
    H[..., 1, 1] = -params.mass_term
    H[..., 0, 1] = cp
    H[..., 1, 0] = cp
    return H


def _propagate_modes(a, b, p, t, params):
    E = mode_energy(p, params)
    cos = np.cos(E * t)
    # sin(Et)/E -> t on the E = 0 mode; exp(-iHt) is the identity there anyway since H = 0
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(E > 0, np.sin(E * t) / E, t)
    cp = params.c * p
    m = params.mass_term
    a2 = cos * a - 1j * sinc * (m * a + cp * b)
    b2 = cos * b - 1j * sinc * (cp * a - m * b)
    return a2, b2


def evolve(state: SpinorField, t: float, params: DiracParams) -> SpinorField:
    """Evolve ``state`` for time ``t`` (us) under the free Dirac Hamiltonian.

    Works in momentum space; the result is returned in the caller's
    representation. Negative ``t`` evolves backwards.
    """
    rep = state.representation
    mom = as_momentum(state)
    a2, b2 = _propagate_modes(mom.upper, mom.lower, mom.grid.p, float(t), params)
    out = mom.with_components((a2, b2), "momentum")
    return as_representation(out, rep)


def evolve_series(state: SpinorField, times, params: DiracParams) -> list[SpinorField]:
    """States at each of ``times`` (position representation)."""
    mom = as_momentum(state)
    out = []
    for t in np.asarray(times, dtype=float):
        a2, b2 = _propagate_modes(mom.upper, mom.lower, mom.grid.p, t, params)
        out.append(to_position(mom.with_components((a2, b2), "momentum")))
    return out


def x_series(state: SpinorField, times, params: DiracParams) -> np.ndarray:
    """<x>(t) from exact propagation, one value per entry of ``times``."""
    return np.array([expect_x(s) for s in evolve_series(state, times, params)])


def _check_norm(state: SpinorField) -> None:
    n = state.norm()
    if abs(n - 1) > NORM_TOLERANCE:
        raise ValueError(f"state is not normalized (norm = {n:.9g})")


def density_x(state: SpinorField) -> np.ndarray:
    """Position probability density ``|upper|^2 + |lower|^2``."""
    s = as_position(state)
    return np.abs(s.upper) ** 2 + np.abs(s.lower) ** 2


def density_p(state: SpinorField) -> np.ndarray:
    """Momentum probability density on the wrapped momentum grid."""
    s = as_momentum(state)
    return np.abs(s.upper) ** 2 + np.abs(s.lower) ** 2


def expect_x(state: SpinorField) -> float:
    _check_norm(state)
    s = as_position(state)
    return float(np.sum(s.grid.x * density_x(s)) * s.grid.dx)


def expect_x2(state: SpinorField) -> float:
    _check_norm(state)
    s = as_position(state)
    return float(np.sum(s.grid.x**2 * density_x(s)) * s.grid.dx)


def expect_p(state: SpinorField) -> float:
    _check_norm(state)
    s = as_momentum(state)
    return float(np.sum(s.grid.p * density_p(s)) * s.grid.dp)


def expect_pauli(state: SpinorField, axis: str) -> float:
    """Expectation of sigma_x, sigma_y or sigma_z."""
    if axis not in PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    _check_norm(state)
    u, v = state.upper, state.lower
    if axis == "z":
        val = np.sum(np.abs(u) ** 2 - np.abs(v) ** 2)
    elif axis == "x":
        val = 2 * np.sum(np.real(np.conj(u) * v))
    else:
        val = 2 * np.sum(np.imag(np.conj(u) * v))
    return float(np.real(val) * state.step)


def expect_energy(state: SpinorField, params: DiracParams) -> float:
    """<H_D> in rad/us."""
    _check_norm(state)
    s = as_momentum(state)
    a, b = s.upper, s.lower
    cp = params.c * s.grid.p
    m = params.mass_term
    val = m * (np.abs(a) ** 2 - np.abs(b) ** 2) + 2 * cp * np.real(np.conj(a) * b)
    return float(np.sum(val) * s.grid.dp)


def heisenberg_x(state0: SpinorField, t: float, params: DiracParams) -> float:
    """<x>(t) from the closed-form Heisenberg-picture position operator.

    Evaluates ``<x(0)> + sum_p psi^+(p) [c^2 p H^-1 t + i (exp(2iHt) - 1) xi] psi(p) dp``
    with ``xi = c (sigma_x - c p H^-1) H^-1 / 2``. Independent of :func:`evolve`;
    used as an oracle for it.
    """
    mom = as_momentum(state0)
    x0 = expect_x(as_position(state0))
    g = mom.grid
    p = g.p
    a, b = mom.upper, mom.lower
    E2 = mode_energy(p, params) ** 2
    singular = E2 == 0
    if np.any(singular):
        w = float(np.sum(np.abs(a[singular]) ** 2 + np.abs(b[singular]) ** 2) * g.dp)
        if w > ZERO_MODE_WEIGHT:
            raise ValueError(
                "H_D is not invertible at p = 0 for a massless particle and the state "
                f"has weight {w:.3g} there"
            )
    keep = ~singular
    p, a, b, E2 = p[keep], a[keep], b[keep], E2[keep]
    E = np.sqrt(E2)
    c = params.c
    H = mode_hamiltonian(p, params)
    Hinv = H / E2[:, None, None]
    eye = np.eye(2)
    xi = 0.5 * c * np.einsum("nij,njk->nik", SIGMA_X - c * p[:, None, None] * Hinv, Hinv)
    phase = np.cos(2 * E * t)[:, None, None] * eye + 1j * (np.sin(2 * E * t) / E)[:, None, None] * H
    op = (c * c * t) * p[:, None, None] * Hinv + 1j * np.einsum("nij,njk->nik", phase - eye, xi)
    v = np.stack([a, b], axis=-1)
    val = np.einsum("ni,nij,nj->n", np.conj(v), op, v)
    return float(x0 + np.real(np.sum(val)) * g.dp)


def heisenberg_x_series(state0: SpinorField, times, params: DiracParams) -> np.ndarray:
    return np.array([heisenberg_x(state0, t, params) for t in np.asarray(times, dtype=float)])
