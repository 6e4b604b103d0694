"""Brute-force check: emitter coupled to a finite set of discretised guide modes.

Integrates the one-excitation amplitude equations directly (rotating frame,
linearised dispersion ``v (k - k0)``, coupling ``sqrt(G v / pi) sin(k x0)``) on
a uniform k-grid of half-width ``K`` about ``k0``. Nothing here uses the delay
equation, so it can be used to validate it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dde import AmplitudeTrajectory
from .params import DetuningProfile, InvalidParameterError, SystemParams, TimeGrid, Zero, is_zero

DEFAULT_N_MODES = 8001
DEFAULT_K = 80.0
MAX_PHASE_PER_STEP = 0.1


class StepTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class ModeSet:
    k_values: np.ndarray
    couplings: np.ndarray
    detunings: np.ndarray

    @property
    def dk(self) -> float:
        return float(self.k_values[1] - self.k_values[0]) if self.k_values.size > 1 else 0.0

    @property
    def recurrence_time(self) -> float:
        """Time after which the finite mode comb revives (``2 pi / (v dk)``)."""
        spread = self.detunings[1] - self.detunings[0]
        return 2 * math.pi / spread


@dataclass(frozen=True)
class MicroState:
    eps: complex
    phi_k: np.ndarray
    dk: float

    @property
    def norm(self) -> float:
        return abs(self.eps) ** 2 + float(np.sum(np.abs(self.phi_k) ** 2)) * self.dk


def build_modes(params: SystemParams, n_modes: int = DEFAULT_N_MODES, K: float = DEFAULT_K) -> ModeSet:
    """Uniform k-grid ``k0 + linspace(-K, K, n_modes)``; ``n_modes`` must be odd."""
    if n_modes < 3 or n_modes % 2 == 0:
        raise InvalidParameterError(f"n_modes must be odd and >= 3, got {n_modes}")
    if not K > 0:
        raise InvalidParameterError(f"K must be > 0, got {K}")
    offsets = np.linspace(-K, K, n_modes)
    k = params.k0 + offsets
    g = math.sqrt(params.gamma * params.v / math.pi) * np.sin(k * params.x0)
    return ModeSet(k_values=k, couplings=g, detunings=params.v * offsets)


def integrate_micro(modes: ModeSet, params: SystemParams, grid: TimeGrid,
                    detuning: DetuningProfile | None = None):
    """RK4 integration of atom + modes from the excited atom and empty guide.

    Returns ``(trajectory, final_state, max_norm_drift)``.
    """
    detuning = Zero() if detuning is None else detuning
    w = modes.detunings
    fastest = float(np.max(np.abs(w)))
    if grid.dt * fastest > MAX_PHASE_PER_STEP:
        raise StepTooLargeError(
            f"dt * v K = {grid.dt * fastest:.3g} > {MAX_PHASE_PER_STEP}; reduce dt")
    dk = modes.dk
    g = modes.couplings.astype(complex)
    gdk = g * dk
    t = grid.times
    if is_zero(detuning):
        d0 = dm = d1 = np.zeros(grid.n_steps)
    else:
        d0 = detuning(t[:-1])
        dm = detuning(t[:-1] + 0.5 * grid.dt)
        d1 = detuning(np.nextafter(t[1:], -np.inf))
    mw = -1j * w

    def f(delta, e, ph):
        de = -1j * delta * e - 1j * np.dot(gdk, ph)
        dph = mw * ph - 1j * g * e
        return de, dph

    dt = grid.dt
    e = 1 + 0j
    ph = np.zeros(w.size, dtype=complex)
    out = np.empty(grid.n_steps + 1, dtype=complex)
    out[0] = e
    drift = 0.0
    for j in range(grid.n_steps):
        a1, b1 = f(d0[j], e, ph)
        a2, b2 = f(dm[j], e + 0.5 * dt * a1, ph + 0.5 * dt * b1)
        a3, b3 = f(dm[j], e + 0.5 * dt * a2, ph + 0.5 * dt * b2)
        a4, b4 = f(d1[j], e + dt * a3, ph + dt * b3)
        e = e + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        ph = ph + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        out[j + 1] = e
        if j % 50 == 49 or j == grid.n_steps - 1:
            drift = max(drift, abs(MicroState(e, ph, dk).norm - 1.0))
    return AmplitudeTrajectory(grid, out), MicroState(complex(e), ph, dk), drift


def reconstruct_field(state: MicroState, modes: ModeSet, x: float) -> complex:
    """Real-space field ``sqrt(2/pi) sum_k phi_k sin(k x) dk``."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return complex(math.sqrt(2 / math.pi) * np.sum(state.phi_k * np.sin(modes.k_values * x)) * state.dk)
