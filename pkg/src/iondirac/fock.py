"""Second engine: the trapped-ion Hamiltonian in a truncated Fock basis.

The ion Hamiltonian ``2 eta omega_tilde sigma_x p + Omega sigma_z`` is built
from ladder operators, with ``x = a + a^dag`` and the canonical
``p = i (a^dag - a) / 2`` (so ``[x, p] = i``). Amplitudes are ordered
internal-major: index ``s * n_trunc + n`` for spinor component ``s`` and
Fock level ``n``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .core import DiracParams, SpinorField
from .propagator import PAULI, as_position

DEFAULT_N_TRUNC = 400
MIN_N_TRUNC = 16
TAIL_LEVELS = 10
HEALTHY_TAIL = 1e-8
LEAK_TAIL = 1e-6


class TruncationError(RuntimeError):
    """Population reached the top of the truncated Fock space."""


class TruncationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class FockState:
    amplitudes: np.ndarray
    n_trunc: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2 * self.n_trunc,):
            raise ValueError(f"expected {2 * self.n_trunc} amplitudes, got shape {amps.shape}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def components(self) -> np.ndarray:
        """Amplitudes reshaped to ``(2, n_trunc)``."""
        return self.amplitudes.reshape(2, self.n_trunc)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class TruncationReport:
    tail_mass: float

    @property
    def healthy(self) -> bool:
        return self.tail_mass < HEALTHY_TAIL

    @property
    def leaking(self) -> bool:
        return not self.healthy

    @property
    def hard_fail(self) -> bool:
        return self.tail_mass > LEAK_TAIL

    @property
    def status(self) -> str:
        return "healthy" if self.healthy else "leaking"


def truncation_check(state: FockState) -> TruncationReport:
    """Population in the top ``TAIL_LEVELS`` Fock levels, summed over both components."""
    tail = np.abs(state.components[:, -TAIL_LEVELS:]) ** 2
    return TruncationReport(float(np.sum(tail)))


def ladder(n_trunc: int) -> np.ndarray:
    """Annihilation operator ``a`` truncated to ``n_trunc`` levels."""
    return np.diag(np.sqrt(np.arange(1, n_trunc, dtype=float)), 1)


def position_operator(n_trunc: int) -> np.ndarray:
    a = ladder(n_trunc)
    return a + a.T


def momentum_operator(n_trunc: int) -> np.ndarray:
    a = ladder(n_trunc)
    return 0.5j * (a.T - a)


class IonHamiltonian:
    """Dense ion Hamiltonian with a cached eigendecomposition."""

    def __init__(self, matrix: np.ndarray, n_trunc: int, params: DiracParams):
        self.matrix = matrix
        self.matrix.flags.writeable = False
        self.n_trunc = n_trunc
        self.params = params

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        w, V = np.linalg.eigh(self.matrix)
        w.flags.writeable = False
        V.flags.writeable = False
        return w, V

    def propagator(self, t: float) -> np.ndarray:
        w, V = self.eigh
        return (V * np.exp(-1j * w * t)) @ V.conj().T


def build_hamiltonian(n_trunc: int, params: DiracParams) -> IonHamiltonian:
    """``c sigma_x (x) p + Omega sigma_z (x) 1`` with ``c = 2 eta omega_tilde``."""
    if n_trunc < MIN_N_TRUNC:
        raise ValueError(f"n_trunc must be >= {MIN_N_TRUNC}, got {n_trunc}")
    c = 2 * params.eta * params.omega_tilde
    H = c * np.kron(PAULI["x"], momentum_operator(n_trunc))
    H = H + params.mass_term * np.kron(PAULI["z"], np.eye(n_trunc))
    return IonHamiltonian(H, n_trunc, params)


def coherent_amplitudes(alpha: complex, n_trunc: int) -> np.ndarray:
    """Poisson amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``."""
    n = np.arange(n_trunc)
    if alpha == 0:
        return (n == 0).astype(complex)
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def initial_fock_state(spinor, motional="ground", n_trunc: int = DEFAULT_N_TRUNC) -> FockState:
    """Product of a spinor with the motional ground state or a coherent state.

    ``motional`` is ``"ground"`` or a complex ``alpha``; in these units
    ``<x> = 2 Re(alpha)`` and ``<p> = Im(alpha)``.
    """
    chi = np.asarray(spinor, dtype=complex).reshape(2)
    if abs(np.linalg.norm(chi) - 1) > 1e-10:
        raise ValueError("spinor must be normalized")
    alpha = 0j if isinstance(motional, str) and motional == "ground" else complex(motional)
    if abs(alpha) ** 2 > n_trunc / 4:
        raise ValueError(f"|alpha|^2 = {abs(alpha) ** 2:.3g} is too large for n_trunc = {n_trunc}")
    return FockState(np.kron(chi, coherent_amplitudes(alpha, n_trunc)), n_trunc)


def hermite_functions(n_levels: int, x) -> np.ndarray:
    """Oscillator eigenfunctions for ``x = a + a^dag``, shape ``(n_levels, len(x))``.

    ``psi_n(x) = 2^(-1/4) phi_n(x / sqrt 2)`` with ``phi_n`` the standard
    Hermite functions. The upward recurrence carries a per-point log scale so
    that neither the Gaussian factor nor high orders under/overflow.
    """
    u = np.asarray(x, dtype=float) / math.sqrt(2)
    out = np.empty((n_levels, u.size))
    log_scale = -0.5 * u**2 - 0.25 * math.log(math.pi) - 0.25 * math.log(2)
    prev = np.zeros_like(u)
    cur = np.ones_like(u)
    out[0] = np.exp(log_scale)
    for n in range(1, n_levels):
        nxt = math.sqrt(2 / n) * u * cur - math.sqrt((n - 1) / n) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            cur = cur / s
            prev = prev / s
            log_scale = log_scale + np.log(s)
        with np.errstate(under="ignore"):
            out[n] = cur * np.exp(log_scale)
    return out


def fock_from_field(state: SpinorField, n_trunc: int = DEFAULT_N_TRUNC) -> FockState:
    """Expand a grid field in the first ``n_trunc`` oscillator eigenfunctions."""
    pos = as_position(state)
    psi_n = hermite_functions(n_trunc, pos.grid.x)
    comps = (psi_n @ pos.components.T).T * pos.grid.dx
    return FockState(comps.reshape(-1), n_trunc)


def evolve_fock(state: FockState, t: float, H: IonHamiltonian, strict: bool = False) -> FockState:
    """Apply ``exp(-i H t)``.

    A tail population above ``LEAK_TAIL`` after evolution raises
    :class:`TruncationError` when ``strict``, otherwise emits a
    :class:`TruncationWarning`.
    """
    if state.n_trunc != H.n_trunc:
        raise ValueError("state and Hamiltonian truncations differ")
    w, V = H.eigh
    amps = V @ (np.exp(-1j * w * t) * (V.conj().T @ state.amplitudes))
    out = FockState(amps, state.n_trunc)
    report = truncation_check(out)
    if report.hard_fail:
        msg = f"truncation leak at t={t}: tail mass {report.tail_mass:.3g}"
        if strict:
            raise TruncationError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return out


def evolve_fock_series(state: FockState, times, H: IonHamiltonian, strict: bool = False) -> list[FockState]:
    return [evolve_fock(state, t, H, strict=strict) for t in np.asarray(times, dtype=float)]


@dataclass(frozen=True)
class FockObservables:
    x: float
    p: float
    sigma_x: float
    sigma_y: float
    sigma_z: float


def fock_observables(state: FockState) -> FockObservables:
    """<x>, <p> and the three Pauli expectations."""
    u, v = state.components
    n = state.n_trunc
    sq = np.sqrt(np.arange(1, n, dtype=float))
    # <a> = sum_n sqrt(n) conj(c_{n-1}) c_n over both components
    a_exp = sum(np.sum(sq * np.conj(comp[:-1]) * comp[1:]) for comp in (u, v))
    return FockObservables(
        x=float(2 * np.real(a_exp)),
        p=float(np.imag(a_exp)),
        sigma_x=float(2 * np.real(np.vdot(u, v))),
        sigma_y=float(2 * np.imag(np.vdot(u, v))),
        sigma_z=float(np.vdot(u, u).real - np.vdot(v, v).real),
    )


def fock_density_x(state: FockState, x_grid) -> np.ndarray:
    """Position density summed over both spinor components."""
    psi_n = hermite_functions(state.n_trunc, x_grid)
    fields = state.components @ psi_n
    return np.sum(np.abs(fields) ** 2, axis=0)


def fock_x_series(state: FockState, times, H: IonHamiltonian, strict: bool = False) -> np.ndarray:
    return np.array([fock_observables(s).x for s in evolve_fock_series(state, times, H, strict)])
