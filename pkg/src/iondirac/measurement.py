"""Emulated read-out: recombination, probe observable, projection noise, tomography.

The probe ``U = exp(-i k x sigma_x / 2)`` followed by a sigma_z measurement
measures ``A(k) = cos(k x) sigma_z + sin(k x) sigma_y``, with
``k = 2 eta omega_probe t`` for probe duration ``t``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DiracParams, Grid, SpinorField
from .propagator import as_position, density_x
from .state_prep import PLUS_Y, carrier_rotation

#: Probe durations [us]: 0 to 14 us in 2 us steps.
DEFAULT_PROBE_TIMES = tuple(float(t) for t in range(0, 15, 2))
#: Tomography k-grid [1/Delta]: 61 points on [-3, 3].
DEFAULT_K_GRID = tuple(np.linspace(-3.0, 3.0, 61))
# above this k_max * <|x|> the sine is no longer near-linear
LINEAR_PHASE_LIMIT = 0.5
# reconstruction values below CLIP_ERROR [1/Delta] are an error; values below CLIP_WARN only warn
CLIP_WARN = -0.02
CLIP_ERROR = -0.05

SIGMA_Z_UP = np.array([1, 0], dtype=complex)


@dataclass(frozen=True, eq=False)
class MotionalEnsemble:
    """Incoherent mixture of motional wavefunctions with a fresh internal spinor."""

    grid: Grid
    weights: tuple
    wavefunctions: tuple
    spinor: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-10:
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        if len(self.weights) != len(self.wavefunctions):
            raise ValueError("one weight per wavefunction required")

    def with_spinor(self, spinor) -> "MotionalEnsemble":
        return MotionalEnsemble(self.grid, self.weights, self.wavefunctions, np.asarray(spinor, dtype=complex))

    def expect(self, f) -> float:
        """Weighted expectation of a function of position."""
        x = self.grid.x
        val = sum(w * np.sum(f(x) * np.abs(phi) ** 2) for w, phi in zip(self.weights, self.wavefunctions))
        return float(val * self.grid.dx)


def recombine(state: SpinorField, spinor=PLUS_Y) -> MotionalEnsemble:
    """Trace out the internal state and re-prepare it as ``spinor``.

    Models the ideal shelving/repumping step: each spinor branch becomes one
    ensemble member carrying its population as weight.
    """
    pos = as_position(state)
    total = pos.norm()
    weights, funcs = [], []
    for comp in (pos.upper, pos.lower):
        w = float(np.sum(np.abs(comp) ** 2) * pos.grid.dx)
        if w / total < 1e-12:
            continue
        weights.append(w)
        funcs.append(np.array(comp) / math.sqrt(w))
    wsum = sum(weights)
    weights = tuple(w / wsum for w in weights)
    return MotionalEnsemble(pos.grid, weights, tuple(funcs), np.asarray(spinor, dtype=complex) / np.linalg.norm(spinor))


def _spinor_bloch(spinor) -> tuple[float, float]:
    u, v = spinor
    sy = 2 * np.imag(np.conj(u) * v)
    sz = abs(u) ** 2 - abs(v) ** 2
    return float(sy), float(sz)


def expect_A(ensemble: MotionalEnsemble, k):
    """``<A(k)>`` for scalar or array ``k`` [1/Delta]."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(np.abs(k_arr) > ensemble.grid.p_nyquist):
        raise ValueError("probe wavenumber exceeds the grid Nyquist momentum")
    sy, sz = _spinor_bloch(ensemble.spinor)
    x = ensemble.grid.x
    dens = sum(w * np.abs(phi) ** 2 for w, phi in zip(ensemble.weights, ensemble.wavefunctions))
    phase = np.outer(k_arr, x)
    cos_k = np.cos(phase) @ dens * ensemble.grid.dx
    sin_k = np.sin(phase) @ dens * ensemble.grid.dx
    out = np.clip(sz * cos_k + sy * sin_k, -1.0, 1.0)
    return float(out[0]) if np.ndim(k) == 0 else out


def sample_A(true_value: float, shots: int, seed) -> tuple[float, float]:
    """Projection-noise estimate of a +-1 observable with mean ``true_value``.

    ``seed`` is an int or a :class:`numpy.random.Generator`. Returns the
    estimate and its binomial standard error ``sqrt((1 - est^2) / shots)``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if abs(true_value) > 1 + 1e-9:
        raise ValueError(f"expectation {true_value} outside [-1, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    prob = min(max((1 + true_value) / 2, 0.0), 1.0)
    counts = rng.binomial(shots, prob)
    est = 2 * counts / shots - 1
    return float(est), math.sqrt(max(1 - est * est, 0.0) / shots)


@dataclass(frozen=True, eq=False)
class ProbeRecord:
    probe_times: np.ndarray
    k_values: np.ndarray
    estimates: np.ndarray
    stderr: np.ndarray
    shots: int | None

    def columns(self) -> dict:
        return {
            "t[us]": self.probe_times,
            "k[1/Delta]": self.k_values,
            "A": self.estimates,
            "stderr": self.stderr,
        }


def probe_x_record(
    state: SpinorField,
    params: DiracParams,
    times=DEFAULT_PROBE_TIMES,
    shots: int | None = None,
    seed=None,
) -> ProbeRecord:
    """Recombine into ``|+>_y`` and record ``<A(k)>`` at each probe time."""
    times = np.asarray(times, dtype=float)
    k = 2 * params.eta * params.omega_probe * times
    ens = recombine(state, PLUS_Y)
    exact = np.atleast_1d(expect_A(ens, k))
    kmax_x = np.max(np.abs(k)) * ens.expect(np.abs)
    if kmax_x > LINEAR_PHASE_LIMIT:
        warnings.warn(f"k_max * <|x|> = {kmax_x:.2f} rad: slope estimate is biased", RuntimeWarning, stacklevel=2)
    if shots is None:
        return ProbeRecord(times, k, exact, np.zeros_like(exact), None)
    if seed is None:
        raise ValueError("a seed is required for shot-sampled probes")
    rng = np.random.default_rng(seed)
    est, err = zip(*(sample_A(v, shots, rng) for v in exact))
    return ProbeRecord(times, k, np.array(est), np.array(err), int(shots))


def slope_estimate(record: ProbeRecord) -> tuple[float, float]:
    """Weighted least-squares slope of ``<A>`` against ``k`` through the origin.

    ``<A(0)> = 0`` exactly for a ``|+>_y`` preparation, so no intercept is
    fitted. With shot noise the standard error uses the binomial errors as
    absolute weights (floored at ``1/shots``); for exact records it comes
    from the residual scatter.
    """
    k, A = record.k_values, record.estimates
    if k.size < 3:
        raise ValueError("at least 3 probe points are required")
    if record.shots is None:
        Skk = np.sum(k * k)
        slope = np.sum(k * A) / Skk
        resid = A - slope * k
        var = np.sum(resid**2) / (k.size - 1) / Skk
        return float(slope), float(math.sqrt(var))
    sig = np.maximum(record.stderr, 1.0 / record.shots)
    w = 1 / sig**2
    Skk = np.sum(w * k * k)
    return float(np.sum(w * k * A) / Skk), float(math.sqrt(1 / Skk))


def measure_x(
    state: SpinorField,
    params: DiracParams,
    times=DEFAULT_PROBE_TIMES,
    shots: int | None = None,
    seed=None,
) -> tuple[float, float]:
    """Estimate ``<x>`` [Delta] from the short-probe-time slope of ``<A(k)>``."""
    if len(times) < 3:
        raise ValueError("at least 3 probe points are required")
    return slope_estimate(probe_x_record(state, params, times, shots, seed))


def _check_k_grid(k_grid) -> np.ndarray:
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size < 3:
        raise ValueError("k_grid must be a 1-d array with at least 3 points")
    if not np.allclose(k, -k[::-1], atol=1e-12) or not np.any(np.abs(k) < 1e-12):
        raise ValueError("k_grid must be symmetric about and include k = 0")
    if not np.allclose(np.diff(k), k[1] - k[0], rtol=1e-9):
        raise ValueError("k_grid must be uniformly spaced")
    return k


def characteristic_function(ensemble: MotionalEnsemble, k_grid, shots: int | None = None, seed=None) -> np.ndarray:
    """``F(k) = <cos kx> + i <sin kx>`` from sigma_z and sigma_y preparations.

    Only ``k >= 0`` is measured; ``F(-k) = conj F(k)`` fills the rest.
    """
    k = _check_k_grid(k_grid)
    mid = k.size // 2
    ks = np.abs(k[mid:])
    cos_vals = np.atleast_1d(expect_A(ensemble.with_spinor(SIGMA_Z_UP), ks))
    sin_vals = np.atleast_1d(expect_A(ensemble.with_spinor(PLUS_Y), ks))
    if shots is not None:
        if seed is None:
            raise ValueError("a seed is required for shot-sampled tomography")
        rng = np.random.default_rng(seed)
        cos_vals = np.array([sample_A(v, shots, rng)[0] for v in cos_vals])
        sin_vals = np.array([sample_A(v, shots, rng)[0] for v in sin_vals])
    half = cos_vals + 1j * sin_vals
    return np.concatenate([np.conj(half[1:][::-1]), half])


def invert_characteristic(F, k_grid, grid: Grid, window: str = "rect") -> np.ndarray:
    """Density on ``grid.x`` from samples of the characteristic function.

    ``rho(x) = dk/(2 pi) sum_j w_j F(k_j) exp(-i k_j x)`` inside the field of
    view ``|x| < pi/dk`` (the period of the sampled transform) and zero
    outside. Negative values above ``CLIP_ERROR`` are clipped to zero; the
    result is renormalized to unit mass.
    """
    k = _check_k_grid(k_grid)
    dk = k[1] - k[0]
    if window == "rect":
        wts = np.ones_like(k)
    elif window == "hann":
        wts = 0.5 * (1 + np.cos(np.pi * k / (np.max(k) + dk)))
    else:
        raise ValueError(f"unknown window {window!r}")
    x = grid.x
    fov = np.abs(x) < math.pi / dk
    rho = np.zeros(grid.n_points)
    kernel = np.exp(-1j * np.outer(x[fov], k))
    rho[fov] = np.real(kernel @ (wts * np.asarray(F))) * dk / (2 * math.pi)
    lowest = float(rho.min())
    if lowest < CLIP_ERROR:
        raise ValueError(f"reconstruction is strongly negative (min {lowest:.3g}); inputs are inconsistent")
    if lowest < CLIP_WARN:
        warnings.warn(f"clipping negative reconstruction values down to {lowest:.3g}", RuntimeWarning, stacklevel=2)
    rho = np.clip(rho, 0.0, None)
    return rho / (np.sum(rho) * grid.dx)


def reconstruct_density(state: SpinorField, k_grid=DEFAULT_K_GRID, shots: int | None = None, seed=None, window: str = "rect") -> np.ndarray:
    """Position density of ``state`` by characteristic-function tomography."""
    ens = recombine(state)
    F = characteristic_function(ens, k_grid, shots, seed)
    return invert_characteristic(F, k_grid, ens.grid, window)


def spinor_resolved_density(
    state: SpinorField,
    component: int,
    k_grid=None,
    shots: int | None = None,
    seed=None,
    window: str = "rect",
) -> tuple[float, np.ndarray]:
    """Population and conditional motional density of one spinor component.

    Component 0 is read directly (post-selection on ``|0>``); component 1 is
    first swapped into ``|0>`` by a pi pulse. ``k_grid=None`` returns the
    exact conditional density, otherwise it is reconstructed tomographically.
    """
    if component not in (0, 1):
        raise ValueError("component must be 0 or 1")
    pos = as_position(state)
    if component == 1:
        pos = carrier_rotation(pos, math.pi, 0.0)
    branch = pos.upper
    weight = float(np.sum(np.abs(branch) ** 2) * pos.grid.dx)
    if weight < 1e-12:
        return 0.0, np.zeros(pos.grid.n_points)
    cond = SpinorField(pos.grid, branch / math.sqrt(weight), np.zeros_like(branch))
    if k_grid is None:
        return weight, density_x(cond)
    return weight, reconstruct_density(cond, k_grid, shots, seed, window)
