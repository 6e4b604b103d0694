"""Atomic amplitude of an emitter in front of a mirror.

The amplitude obeys the delay equation (rotating frame, detuning ``D(t)``)::

    e'(t) = -i D(t) e(t) - (G/2) e(t) + (G/2) exp(i phi) e(t - t_d) H(t - t_d)

with ``e(0) = 1``. :func:`solve_dde` integrates it by the method of steps,
:func:`series_solution` evaluates the exact finite sum for zero detuning.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .params import (
    DetuningProfile,
    SystemParams,
    TimeGrid,
    Zero,
    is_zero,
    phase_is_trapping,
)

# modulus below which a term of the series is dropped, relative to the largest
SERIES_REL_CUTOFF = 1e-18
STEP_WARN = 0.1


class PoleError(ZeroDivisionError):
    """Laplace transform evaluated at (or numerically on top of) a pole."""


class StepSizeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Complex amplitude sampled on ``grid``; ``values[j]`` is the value at ``t_j``."""

    grid: TimeGrid
    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def pe(self) -> np.ndarray:
        """Excited-state probability ``|e(t_j)|**2``."""
        return np.abs(self.values) ** 2

    def at(self, t: float) -> complex:
        """Value at grid time ``t``; zero for ``t < 0``."""
        if t < 0 and abs(t) > 1e-9 * self.grid.dt:
            return 0j
        j = self.grid.index(t)
        if j > self.grid.n_steps:
            raise IndexError(f"t={t!r} is beyond the trajectory horizon {self.grid.t_max!r}")
        return complex(self.values[j])


# --- closed forms ----------------------------------------------------------

def series_solution(params: SystemParams, t: float) -> complex:
    """Exact amplitude at time ``t`` for zero detuning.

    Sums the ``floor(t / t_d) + 1`` round-trip contributions in log-magnitude
    form, so long horizons do not overflow.
    """
    if t < 0:
        raise ValueError(f"series_solution needs t >= 0, got {t}")
    g, td, phi = params.gamma, params.t_d, params.phi
    if g == 0:
        return 1 + 0j
    if td == 0:
        return cmath.exp(-0.5 * g * (1 - cmath.exp(1j * phi)) * t)
    n_max = int(math.floor(t / td + 1e-12))
    n = np.arange(n_max + 1)
    lag = np.clip(t - n * td, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = (n * (math.log(0.5 * g) + 0.5 * g * td) + n * np.log(lag)
                  - gammaln(n + 1) - 0.5 * g * t)
    logmag[0] = -0.5 * g * t
    keep = logmag >= logmag.max() + math.log(SERIES_REL_CUTOFF)
    terms = np.exp(logmag[keep] + 1j * phi * n[keep])
    return complex(terms.sum())


def series_trajectory(params: SystemParams, grid: TimeGrid) -> AmplitudeTrajectory:
    vals = np.array([series_solution(params, t) for t in grid.times])
    return AmplitudeTrajectory(grid, vals)


def approx_small_delay(params: SystemParams, t: float) -> complex:
    """Small-delay approximation, valid up to a global phase when ``G t_d << 1``."""
    g, td, phi = params.gamma, params.t_d, params.phi
    if t <= td:
        return cmath.exp(-0.5 * g * t)
    ratio = (1 + cmath.exp(1j * phi) * 0.5 * g * td) / (1 + 0.5 * g * td)
    return math.exp(-0.5 * g * td) * ratio ** ((t - td) / td)


def per_delay_ratio(params: SystemParams) -> complex:
    """Amplitude gain per round trip in the small-delay recursion."""
    h = 0.5 * params.gamma * params.t_d
    return (1 + cmath.exp(1j * params.phi) * h) / (1 + h)


def asymptotic_amplitude(params: SystemParams) -> float:
    """Long-time amplitude ``lim s * L[e](s)`` as ``s -> 0``."""
    if phase_is_trapping(params.phi):
        return 1.0 / (1.0 + 0.5 * params.gamma * params.t_d)
    return 0.0


def laplace_eval(params: SystemParams, s: complex) -> complex:
    """Laplace transform of the zero-detuning amplitude."""
    den = s + 0.5 * params.gamma * (1 - cmath.exp(1j * params.phi - s * params.t_d))
    if abs(den) < 1e-12:
        raise PoleError(f"|denominator| = {abs(den):.3g} at s={s!r}")
    return 1 / den


# --- method of steps -------------------------------------------------------

def _stage_rates(detuning: DetuningProfile, grid: TimeGrid, loss: float):
    """Per-step linear coefficients ``-i D - loss/2`` at the three RK4 stage times.

    The end-of-step value uses the left limit so that a step edge placed on a
    grid point is seen by the step that starts there, not the one that ends there.
    """
    t = grid.times
    if is_zero(detuning):
        a = np.full(grid.n_steps + 1, -0.5 * loss, dtype=complex)
        return a[:-1], a[:-1], a[:-1]
    d_start = detuning(t[:-1])
    d_mid = detuning(t[:-1] + 0.5 * grid.dt)
    d_end = detuning(np.nextafter(t[1:], -np.inf))
    return (-1j * d_start - 0.5 * loss, -1j * d_mid - 0.5 * loss, -1j * d_end - 0.5 * loss)


def _check_step(params: SystemParams, grid: TimeGrid, detuning: DetuningProfile, loss: float):
    dmax = 0.0 if is_zero(detuning) else float(np.max(np.abs(detuning(grid.times))))
    if grid.dt * max(loss, params.gamma, dmax) > STEP_WARN:
        warnings.warn(f"dt*max(rate) = {grid.dt * max(loss, params.gamma, dmax):.3g} exceeds {STEP_WARN}",
                      StepSizeWarning, stacklevel=3)


def integrate_delay(params: SystemParams, grid: TimeGrid, detuning: DetuningProfile, *,
                    loss: float | None = None, feedback: complex | None = None,
                    kicks: np.ndarray | None = None) -> np.ndarray:
    """Fixed-step RK4 method of steps for ``e' = a(t) e + c e(t - t_d) H(t - t_d)``.

    ``a(t) = -i D(t) - loss/2`` and ``c = feedback`` (defaults: ``loss = gamma``,
    ``c = (gamma/2) exp(i phi)``). Delayed samples are read straight off the
    stored trajectory; the delayed half-step value comes from the cubic Hermite
    interpolant of the stored samples and their one-sided derivatives.
    ``kicks``, if given, multiplies the amplitude after step ``j`` by ``kicks[j]``.

    Returns the complex samples ``e(t_0) .. e(t_n)``.
    """
    loss = params.gamma if loss is None else loss
    c = 0.5 * params.gamma * cmath.exp(1j * params.phi) if feedback is None else feedback
    td = params.t_d
    _check_step(params, grid, detuning, loss)

    n = grid.n_steps
    if td == 0:
        # zero delay: the feedback acts instantaneously
        if is_zero(detuning) and kicks is None:
            return np.exp((-0.5 * loss + c) * grid.times).astype(complex)
        m = None
        a0, ah, a1 = (x + c for x in _stage_rates(detuning, grid, loss))
    else:
        m = grid.delay_steps(td)
        a0, ah, a1 = _stage_rates(detuning, grid, loss)
    a0, ah, a1 = a0.tolist(), ah.tolist(), a1.tolist()
    rot = None if kicks is None else np.asarray(kicks, dtype=complex).tolist()

    dt = grid.dt
    h2, h6, h8 = 0.5 * dt, dt / 6.0, dt / 8.0
    y = [0j] * (n + 1)
    f_right = [0j] * (n + 1)  # derivative at t_j seen from the step starting there
    f_left = [0j] * (n + 1)   # derivative at t_j seen from the step ending there
    y[0] = 1 + 0j
    for j in range(n):
        y0 = y[j]
        if m is not None and j >= m:
            i = j - m
            d0, d1 = y[i], y[i + 1]
            dh = 0.5 * (d0 + d1) + h8 * (f_right[i] - f_left[i + 1])
            cd0, cdh, cd1 = c * d0, c * dh, c * d1
        else:
            cd0 = cdh = cd1 = 0j
        k1 = a0[j] * y0 + cd0
        k2 = ah[j] * (y0 + h2 * k1) + cdh
        k3 = ah[j] * (y0 + h2 * k2) + cdh
        k4 = a1[j] * (y0 + dt * k3) + cd1
        y1 = y0 + h6 * (k1 + 2 * k2 + 2 * k3 + k4)
        f1 = a1[j] * y1 + cd1
        if rot is not None:
            y1 *= rot[j]
            f1 *= rot[j]
        f_right[j] = k1
        f_left[j + 1] = f1
        y[j + 1] = y1
    return np.array(y, dtype=complex)


def solve_dde(params: SystemParams, grid: TimeGrid,
              detuning: DetuningProfile | None = None) -> AmplitudeTrajectory:
    """Integrate the ideal-mirror delay equation on ``grid`` from ``e(0) = 1``.

    Raises:
        GridAlignmentError: if ``t_d`` is active on the grid and is not an
            even number of steps.
    """
    detuning = Zero() if detuning is None else detuning
    return AmplitudeTrajectory(grid, integrate_delay(params, grid, detuning))


def rhs(params: SystemParams, traj: AmplitudeTrajectory, t: float,
        detuning: DetuningProfile | None = None) -> complex:
    """Right-hand side of the delay equation at grid time ``t`` (delay term on for ``t >= t_d``)."""
    detuning = Zero() if detuning is None else detuning
    g, td = params.gamma, params.t_d
    e = traj.at(t)
    out = -1j * detuning_value(detuning, t) * e - 0.5 * g * e
    if t - td >= -1e-9 * traj.grid.dt:
        out += 0.5 * g * cmath.exp(1j * params.phi) * traj.at(max(t - td, 0.0))
    return out


def detuning_value(detuning: DetuningProfile, t: float) -> float:
    return float(detuning(t))
