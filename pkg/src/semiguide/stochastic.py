"""Non-ideal emitter: extra losses, a leaky mirror and white-noise dephasing.

Each realisation integrates::

    e' + i eta(t) e = -((G + G_ext)/2) e + r (G/2) exp(i phi) e(t - t_d) H(t - t_d)

with ``<eta(t) eta(t')> = 2 dw delta(t - t')``. The deterministic part uses the
same RK4 stepper as :func:`semiguide.dde.solve_dde`; the noise enters as a
phase kick ``exp(-i dphi_j)`` after every step with ``dphi_j ~ N(0, 2 dw dt)``
(Lie splitting). Kicks are unitary, so ``|e|`` never grows because of noise, and
the ensemble-mean amplitude is damped at exactly ``dw`` per unit time.

Random numbers: realisation ``i`` draws its kicks, in step order, from numpy's
Philox4x64 counter-based generator keyed by ``(master_seed, i)``. Streams do
not depend on how many realisations run or in which order.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dde import AmplitudeTrajectory, integrate_delay
from .params import DetuningProfile, InvalidParameterError, SystemParams, TimeGrid, Zero

NOISE_SCHEME = "phase-kick-lie-splitting"
RNG_SCHEME = "numpy-philox4x64-key(master_seed,realization)"
DEFAULT_REALIZATIONS = 100
_MASK64 = (1 << 64) - 1


def reflection_coefficient(R: float) -> complex:
    """Mirror reflection amplitude ``R + i sqrt(R (1 - R))`` (modulus squared ``R``)."""
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"reflectivity must be in [0, 1], got {R}")
    return complex(R, math.sqrt(R * (1.0 - R)))


@dataclass(frozen=True)
class NoiseParams:
    gamma_ext: float = 0.0
    R: float = 1.0
    delta_omega: float = 0.0
    n_realizations: int = DEFAULT_REALIZATIONS
    master_seed: int = 0

    def __post_init__(self):
        if self.gamma_ext < 0:
            raise InvalidParameterError(f"gamma_ext must be >= 0, got {self.gamma_ext}")
        if not 0.0 <= self.R <= 1.0:
            raise InvalidParameterError(f"R must be in [0, 1], got {self.R}")
        if self.delta_omega < 0:
            raise InvalidParameterError(f"delta_omega must be >= 0, got {self.delta_omega}")
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise InvalidParameterError(f"n_realizations must be >= 1, got {self.n_realizations}")
        if int(self.master_seed) != self.master_seed:
            raise InvalidParameterError(f"master_seed must be an integer, got {self.master_seed}")

    @property
    def r(self) -> complex:
        return reflection_coefficient(self.R)

    def gamma_tot(self, params: SystemParams) -> float:
        return params.gamma + self.gamma_ext

    def to_dict(self) -> dict:
        return {"gamma_ext": self.gamma_ext, "R": self.R, "delta_omega": self.delta_omega,
                "n_realizations": int(self.n_realizations), "master_seed": int(self.master_seed)}


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    key = np.array([int(master_seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def phase_kicks(noise: NoiseParams, grid: TimeGrid, index: int) -> np.ndarray | None:
    """Per-step unitary factors for realisation ``index``; None without dephasing."""
    if noise.delta_omega == 0:
        return None
    sigma = math.sqrt(2.0 * noise.delta_omega * grid.dt)
    dphi = sigma * realization_rng(noise.master_seed, index).standard_normal(grid.n_steps)
    return np.exp(-1j * dphi)


def solve_noisy_dde(params: SystemParams, noise: NoiseParams, grid: TimeGrid,
                    detuning: DetuningProfile | None = None,
                    realization_index: int = 0) -> AmplitudeTrajectory:
    """One stochastic trajectory of the non-ideal model."""
    if not 0 <= realization_index < noise.n_realizations:
        raise IndexError(f"realization_index {realization_index} outside "
                         f"[0, {noise.n_realizations})")
    detuning = Zero() if detuning is None else detuning
    loss = params.gamma + noise.gamma_ext
    r = noise.r
    feedback = None if r == 1 else r * 0.5 * params.gamma * cmath.exp(1j * params.phi)
    vals = integrate_delay(params, grid, detuning,
                           loss=None if noise.gamma_ext == 0 else loss,
                           feedback=feedback, kicks=phase_kicks(noise, grid, realization_index))
    return AmplitudeTrajectory(grid, vals)


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble statistics per grid point.

    ``mean_amplitude`` is the complex ``<e(t_j)>``; ``amplitude_stderr`` is the
    standard error of its real part.
    """

    grid: TimeGrid
    mean_pe: np.ndarray
    stderr: np.ndarray
    n_realizations: int
    mean_amplitude: np.ndarray
    amplitude_stderr: np.ndarray


def _run_one(args):
    params, noise, grid, detuning, i = args
    return solve_noisy_dde(params, noise, grid, detuning, i).values


def ensemble_average(params: SystemParams, noise: NoiseParams, grid: TimeGrid,
                     detuning: DetuningProfile | None = None, workers: int = 1) -> EnsembleResult:
    """Average ``n_realizations`` trajectories.

    Results are accumulated in realisation order, so they are bitwise identical
    for any ``workers``.
    """
    n = int(noise.n_realizations)
    jobs = [(params, noise, grid, detuning, i) for i in range(n)]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traj = list(pool.map(_run_one, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        traj = [_run_one(j) for j in jobs]
    vals = np.vstack(traj)
    pe = np.abs(vals) ** 2
    mean_pe = pe.mean(axis=0)
    mean_amp = vals.mean(axis=0)
    if n > 1:
        stderr = pe.std(axis=0, ddof=1) / math.sqrt(n)
        amp_se = vals.real.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        stderr = np.zeros_like(mean_pe)
        amp_se = np.zeros_like(mean_pe)
    return EnsembleResult(grid=grid, mean_pe=mean_pe, stderr=stderr, n_realizations=n,
                          mean_amplitude=mean_amp, amplitude_stderr=amp_se)


def fit_amplitude_decay(grid: TimeGrid, samples: np.ndarray, t_fit: float,
                        n_groups: int = 20) -> tuple[float, float]:
    """Fit ``Re<e(t)> = exp(-rate t)`` on ``(0, t_fit]``; returns ``(rate, stderr)``.

    ``samples`` holds one trajectory per row. The rate is the least-squares
    slope of ``-log Re<e>`` through the origin; its error is a delete-one-group
    jackknife over ``n_groups`` blocks of realisations.
    """
    t = grid.times
    sel = (t > 0) & (t <= t_fit * (1 + 1e-12))
    tt = t[sel]

    def rate(rows):
        y = -np.log(rows[:, sel].real.mean(axis=0))
        return float(np.dot(tt, y) / np.dot(tt, tt))

    full = rate(samples)
    groups = np.array_split(np.arange(samples.shape[0]), n_groups)
    loo = np.array([rate(np.delete(samples, g, axis=0)) for g in groups])
    se = math.sqrt((n_groups - 1) / n_groups * np.sum((loo - loo.mean()) ** 2))
    return full, se
