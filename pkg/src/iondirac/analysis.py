"""Zitterbewegung fits and mass sweeps.

Trajectories are fitted with the three-parameter model
``x(t) = a t + R sin(omega t)``; no phase or damping term is added.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import DiracParams, Grid, SpinorField, compton_wavelength, make_grid
from .fock import DEFAULT_N_TRUNC, build_hamiltonian, fock_from_field, fock_x_series
from .propagator import heisenberg_x_series, x_series
from .state_prep import fig1_state

MIN_SAMPLES = 8
MIN_PERIODS = 1.5
DEFAULT_HORIZON = 250.0
DEFAULT_STEP = 2.0
ENGINES = ("spectral", "oracle", "fock")


class ZbFitError(RuntimeError):
    """Least squares did not converge; ``best_residual`` holds the best cost seen."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True, eq=False)
class ZbFit:
    a: float
    R_zb: float
    omega_zb: float
    covariance: np.ndarray
    residual_norm: float
    degenerate: bool = False
    phase_inverted: bool = False

    @property
    def stderr(self) -> np.ndarray:
        """One-sigma errors of ``(a, R_zb, omega_zb)``."""
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))


def zb_model(t, a, R, omega):
    t = np.asarray(t, dtype=float)
    return a * t + R * np.sin(omega * t)


def _linear_fit(t, x, w):
    # weighted least squares for x = a t (the model passes through the origin)
    a = np.sum(w * t * x) / np.sum(w * t * t)
    return a, 1 / np.sum(w * t * t)


def _covariance(jac, cost, n, absolute):
    JtJ = jac.T @ jac
    cov = np.linalg.pinv(JtJ)
    if not absolute:
        dof = max(n - jac.shape[1], 1)
        cov = cov * (2 * cost / dof)
    return 0.5 * (cov + cov.T)


def _grid_seed(t, x, w, omega_lo, omega_hi):
    # variable projection: for fixed omega the model is linear in (a, R);
    # spacing pi/(4 span) keeps the true minimum inside the basin of one node
    n = max(61, int(4 * (omega_hi - omega_lo) * np.ptp(t) / math.pi) + 1)
    best = None
    sw = np.sqrt(w)
    for om in np.linspace(omega_lo, omega_hi, n):
        A = np.column_stack([t, np.sin(om * t)]) * sw[:, None]
        coef, *_ = np.linalg.lstsq(A, x * sw, rcond=None)
        r = np.sum((A @ coef - x * sw) ** 2)
        if best is None or r < best[0]:
            best = (r, coef[0], coef[1], om)
    return best[1:]


def fit_zb(times, x_values, sigmas=None, omega_seed: float | None = None, max_nfev: int = 2000) -> ZbFit:
    """Weighted Levenberg-Marquardt fit of ``a t + R sin(omega t)``.

    Parameters
    ----------
    times, x_values : array_like
        Samples of <x>(t) [us, Delta].
    sigmas : array_like, optional
        One-sigma errors of ``x_values``. When given, the covariance uses
        them as absolute errors; otherwise it is scaled by the residual
        variance.
    omega_seed : float, optional
        Starting frequency, typically ``2*Omega``. ``0`` fits the drift only
        (massless case). ``None`` seeds from the periodogram peak.

    Raises
    ------
    ZbFitError
        If no converged fit is found.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(x_values, dtype=float)
    if t.shape != x.shape or t.ndim != 1:
        raise ValueError("times and x_values must be 1-d arrays of equal length")
    if t.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    absolute = sigmas is not None
    sig = np.ones_like(t) if sigmas is None else np.asarray(sigmas, dtype=float)
    if np.any(sig <= 0):
        raise ValueError("sigmas must be positive")
    w = 1 / sig**2

    a0, var_a = _linear_fit(t, x, w)
    detr = x - a0 * t
    scale = max(np.max(np.abs(x)), 1e-300)
    if omega_seed == 0 or np.ptp(detr) <= 1e-10 * scale:
        resid = detr / sig
        cost = 0.5 * float(np.sum(resid**2))
        if not absolute:
            var_a *= 2 * cost / max(t.size - 1, 1)
        cov = np.diag([var_a, 0.0, 0.0])
        return ZbFit(float(a0), 0.0, float(omega_seed or 0.0), cov, math.sqrt(2 * cost), degenerate=True)

    if omega_seed is None:
        freqs = np.fft.rfftfreq(t.size, d=np.mean(np.diff(t))) * 2 * math.pi
        power = np.abs(np.fft.rfft(detr - detr.mean()))
        omega_seed = float(freqs[1 + np.argmax(power[1:])])
    omega_seed = abs(omega_seed)
    if omega_seed * np.ptp(t) < MIN_PERIODS * 2 * math.pi:
        warnings.warn(
            f"samples span {omega_seed * np.ptp(t) / (2 * math.pi):.2f} periods of the seed frequency",
            RuntimeWarning,
            stacklevel=2,
        )

    def residuals(q):
        return (zb_model(t, *q) - x) / sig

    def jac(q):
        a, R, om = q
        return np.column_stack([t, np.sin(om * t), R * t * np.cos(om * t)]) / sig[:, None]

    def solve(start):
        return least_squares(residuals, start, jac=jac, method="lm", max_nfev=max_nfev, xtol=1e-15, ftol=1e-15, gtol=1e-15)

    # LM from the supplied seed and from the best node of a frequency grid
    # over [seed/2, 2 seed]; the lower converged cost wins
    lo, hi = omega_seed / 2, 2 * omega_seed
    starts = [np.array([a0, np.ptp(detr) / 2, omega_seed]), np.array(_grid_seed(t, x, w, lo, hi))]
    results = [solve(s) for s in starts]
    best_cost = min(r.cost for r in results)
    ok = [r for r in results if r.status > 0]
    if not ok:
        raise ZbFitError(f"fit did not converge: {results[0].message}", math.sqrt(2 * best_cost))
    res = min(ok, key=lambda r: r.cost)

    a, R, om = res.x
    cov = _covariance(res.jac, res.cost, t.size, absolute)
    if om < 0:
        om, R = -om, -R
        cov = cov * np.outer([1, -1, -1], [1, -1, -1])
    inverted = R < 0
    if inverted:
        R = -R
        cov = cov * np.outer([1, -1, 1], [1, -1, 1])
    return ZbFit(float(a), float(R), float(om), cov, math.sqrt(2 * res.cost), phase_inverted=bool(inverted))


def detrended_amplitude(times, x_values, t_lo: float, t_hi: float) -> float:
    """Half the peak-to-peak of ``x`` minus its linear trend on ``[t_lo, t_hi]``."""
    t = np.asarray(times, dtype=float)
    x = np.asarray(x_values, dtype=float)
    m = (t >= t_lo) & (t <= t_hi)
    if m.sum() < 3:
        raise ValueError("window holds fewer than 3 samples")
    coef = np.polyfit(t[m], x[m], 1)
    r = x[m] - np.polyval(coef, t[m])
    return float(np.ptp(r) / 2)


def trajectory(state: SpinorField, times, params: DiracParams, engine: str = "spectral", n_trunc: int = DEFAULT_N_TRUNC) -> np.ndarray:
    """<x>(t) from the chosen engine: ``spectral``, ``oracle`` or ``fock``."""
    if engine == "spectral":
        return x_series(state, times, params)
    if engine == "oracle":
        return heisenberg_x_series(state, times, params)
    if engine == "fock":
        H = build_hamiltonian(n_trunc, params)
        return fock_x_series(fock_from_field(state, n_trunc), times, H, strict=True)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


@dataclass(frozen=True, eq=False)
class SweepRow:
    mass_term: float
    mass_parameter: float
    compton: float
    fit: ZbFit | None
    error: str | None = None


def auto_horizon(masses, minimum: float = DEFAULT_HORIZON, step: float = DEFAULT_STEP) -> float:
    """Smallest multiple of ``step`` >= ``minimum`` spanning two ZB periods of the lightest mass."""
    massive = [m for m in masses if m > 0]
    need = 2 * math.pi / min(massive) if massive else 0.0
    return step * math.ceil(max(minimum, need) / step - 1e-9)


def zb_sweep(
    masses,
    params: DiracParams,
    initial_state: SpinorField | None = None,
    horizon: float | None = None,
    step: float = DEFAULT_STEP,
    engine: str = "spectral",
    grid: Grid | None = None,
) -> list[SweepRow]:
    """Evolve and fit one trajectory per mass term, ordered by mass.

    ``masses`` are values of ``Omega`` [rad/us]; ``params`` supplies c and
    the lab parameters. ``horizon=None`` picks :func:`auto_horizon`. A row
    whose fit fails carries the error message instead of a fit.
    """
    masses = sorted(float(m) for m in masses)
    if not masses:
        raise ValueError("mass list is empty")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if horizon is None:
        horizon = auto_horizon(masses, step=step)
    massive = [m for m in masses if m > 0]
    if massive and horizon * min(massive) < 2 * math.pi * (1 - 1e-9):
        raise ValueError(f"horizon {horizon} us covers fewer than 2 ZB periods of the lightest mass")
    state = fig1_state(grid or make_grid()) if initial_state is None else initial_state
    times = np.arange(0.0, horizon + step / 2, step)
    rows = []
    for m in masses:
        p = params.with_mass(m)
        lam = compton_wavelength(p) if m > 0 else math.inf
        try:
            xs = trajectory(state, times, p, engine)
            fit = fit_zb(times, xs, omega_seed=2 * m)
            rows.append(SweepRow(m, m / (params.eta * params.omega_tilde), lam, fit))
        except (ZbFitError, RuntimeError, ValueError) as exc:
            rows.append(SweepRow(m, m / (params.eta * params.omega_tilde), lam, None, str(exc)))
    return rows
