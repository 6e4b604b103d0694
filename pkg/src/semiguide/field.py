"""Photon field radiated by the emitter, reconstructed from its amplitude history.

All retarded times are looked up on the trajectory grid, so the detector
distance ``d`` must be a whole number of ``v * dt`` and field-map positions
are snapped to the lattice ``x0 + j v dt``. Intensities are in units of
``gamma / v`` when ``gamma = v = 1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dde import AmplitudeTrajectory
from .params import (
    ALIGN_RTOL,
    DetuningProfile,
    GridAlignmentError,
    SystemParams,
    Zero,
)


class OutOfRangeError(IndexError):
    """Requested a retarded time beyond the trajectory horizon."""


@dataclass(frozen=True)
class FieldSample:
    x: float
    t: float
    amplitude: complex

    @property
    def intensity(self) -> float:
        return abs(self.amplitude) ** 2


def _lattice_steps(length: float, params: SystemParams, traj: AmplitudeTrajectory) -> int:
    """``length`` in units of ``v dt``; raises unless it is a whole number."""
    unit = params.v * traj.grid.dt
    j = round(length / unit)
    if abs(j * unit - length) > ALIGN_RTOL * max(unit, abs(length)):
        raise GridAlignmentError(f"length {length!r} is not a multiple of v*dt = {unit!r}")
    return int(j)


def _delay_steps(params: SystemParams, traj: AmplitudeTrajectory) -> int:
    if params.t_d == 0:
        return 0
    m = traj.grid.delay_steps(params.t_d)
    return traj.grid.n_steps + 1 if m is None else m


def _value(traj: AmplitudeTrajectory, j: int) -> complex:
    if j < 0:
        return 0j
    if j > traj.grid.n_steps:
        raise OutOfRangeError(f"grid index {j} beyond horizon {traj.grid.n_steps}")
    return complex(traj.values[j])


def output_field(traj: AmplitudeTrajectory, params: SystemParams, d: float, t: float,
                 r: complex = 1.0) -> complex:
    """Field at the detector ``x0 + d`` at time ``t``; ``r`` is the mirror reflection amplitude."""
    if d <= 0:
        raise ValueError(f"detector distance must be > 0, got {d}")
    jd = _lattice_steps(d, params, traj)
    jp = traj.grid.index(t) - jd
    if jp < 0:
        return 0j
    m = _delay_steps(params, traj)
    if jp > traj.grid.n_steps:
        raise OutOfRangeError(f"t - d/v = {t - d / params.v!r} beyond horizon {traj.grid.t_max!r}")
    pref = math.sqrt(params.gamma / (2 * params.v)) * cmath.exp(1j * params.k0 * d)
    val = _value(traj, jp)
    if jp >= m:
        val -= r * cmath.exp(1j * params.phi) * _value(traj, jp - m)
    return pref * val


def output_field_series(traj: AmplitudeTrajectory, params: SystemParams, d: float,
                        r: complex = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Detector field sampled at ``t' = t - d/v = t_j`` for every grid point.

    Returns ``(t_prime, psi)``.
    """
    if d <= 0:
        raise ValueError(f"detector distance must be > 0, got {d}")
    _lattice_steps(d, params, traj)
    e = traj.values
    m = _delay_steps(params, traj)
    pref = math.sqrt(params.gamma / (2 * params.v)) * cmath.exp(1j * params.k0 * d)
    psi = e.astype(complex)
    if m <= traj.grid.n_steps:
        psi[m:] -= r * cmath.exp(1j * params.phi) * e[: e.size - m]
    return traj.times, pref * psi


def output_field_from_derivative(traj: AmplitudeTrajectory, params: SystemParams, d: float,
                                 t: float, detuning: DetuningProfile | None = None) -> complex:
    """Detector field from the emitter's rate of change (ideal mirror).

    ``-sqrt(2 / (G v)) exp(i k0 d) [e'(t') + i D(t') e(t')]`` with ``e'`` taken
    from the equation of motion. The overall minus sign makes this agree with
    :func:`output_field`.
    """
    detuning = Zero() if detuning is None else detuning
    jd = _lattice_steps(d, params, traj)
    jp = traj.grid.index(t) - jd
    if jp < 0:
        return 0j
    if jp > traj.grid.n_steps:
        raise OutOfRangeError(f"t - d/v beyond horizon {traj.grid.t_max!r}")
    tp = jp * traj.grid.dt
    m = _delay_steps(params, traj)
    g = params.gamma
    e = _value(traj, jp)
    delta = float(detuning(tp))
    de = -1j * delta * e - 0.5 * g * e
    if jp >= m:
        de += 0.5 * g * cmath.exp(1j * params.phi) * _value(traj, jp - m)
    bracket = de + 1j * delta * e
    return -math.sqrt(2 / (g * params.v)) * cmath.exp(1j * params.k0 * d) * bracket


def realspace_field(traj: AmplitudeTrajectory, params: SystemParams, x: float, t: float) -> complex:
    """Field amplitude at position ``x >= 0`` and time ``t`` (includes the ``-i`` phase).

    Sum of the left-going wave between atom and mirror, the right-going wave
    and the mirror image. At ``x = x0`` the two direct waves each count half.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    j = _lattice_steps(x - params.x0, params, traj)
    return _realspace_index(traj, params, j, traj.grid.index(t))


def _realspace_index(traj: AmplitudeTrajectory, params: SystemParams, j: int, jt: int) -> complex:
    """Field at lattice site ``x = x0 + j v dt`` and grid time ``t = jt dt``."""
    m = traj.grid.delay_steps(params.t_d)
    if m is None:
        m = _lattice_steps(2 * params.x0, params, traj)
    x = params.x0 + j * params.v * traj.grid.dt
    k0, x0 = params.k0, params.x0
    direct = _value(traj, jt - abs(j))
    if j < 0:
        total = cmath.exp(1j * k0 * (x0 - x)) * direct
    elif j > 0:
        total = cmath.exp(1j * k0 * (x - x0)) * direct
    else:
        total = direct
    total -= cmath.exp(1j * k0 * (x + x0)) * _value(traj, jt - j - m)
    return -1j * math.sqrt(params.gamma / (2 * params.v)) * total


@dataclass(frozen=True)
class FieldMap:
    """Real-space field on snapped positions ``x`` at times ``t`` (shape ``(len(t), len(x))``)."""

    x: np.ndarray
    t: np.ndarray
    psi: np.ndarray
    x_requested: np.ndarray

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def max_snap(self) -> float:
        return float(np.max(np.abs(self.x - self.x_requested))) if self.x.size else 0.0


def field_map(traj: AmplitudeTrajectory, params: SystemParams, xs, ts) -> FieldMap:
    """Evaluate the real-space field, snapping each ``x`` to the nearest lattice site."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    unit = params.v * traj.grid.dt
    js = np.rint((xs - params.x0) / unit).astype(int)
    js = np.maximum(js, -int(round(params.x0 / unit)))
    snapped = params.x0 + js * unit
    jts = [traj.grid.index(t) for t in ts]
    psi = np.array([[_realspace_index(traj, params, int(j), jt) for j in js] for jt in jts])
    return FieldMap(x=snapped, t=ts, psi=psi, x_requested=xs)


def guide_probability(traj: AmplitudeTrajectory, params: SystemParams, t: float,
                      x_max: float) -> float:
    """Photon probability ``int_0^x_max |psi(x, t)|^2 dx`` by the trapezoid rule on the lattice."""
    unit = params.v * traj.grid.dt
    j_lo = -int(round(params.x0 / unit))
    j_hi = _lattice_steps(x_max - params.x0, params, traj)
    jt = traj.grid.index(t)
    vals = np.array([abs(_realspace_index(traj, params, j, jt)) ** 2 for j in range(j_lo, j_hi + 1)])
    return float(np.trapezoid(vals, dx=unit))


def flux_series(traj: AmplitudeTrajectory, params: SystemParams, d: float,
                r: complex = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative photon number past the detector versus ``t' = t - d/v``.

    Trapezoid rule on the grid, split at ``t' = t_d`` where the field jumps
    (left piece uses the one-term limit).
    """
    tp, psi = output_field_series(traj, params, d, r)
    dens = params.v * np.abs(psi) ** 2
    dt = traj.grid.dt
    m = _delay_steps(params, traj)
    cum = np.zeros_like(dens)
    if m <= traj.grid.n_steps:
        # left limit at t' = t_d: only the direct term
        pref2 = params.gamma / (2 * params.v)
        left = dens[:m + 1].copy()
        left[m] = params.v * pref2 * abs(traj.values[m]) ** 2
        cum[1:m + 1] = np.cumsum(0.5 * dt * (left[1:] + left[:-1]))
        cum[m + 1:] = cum[m] + np.cumsum(0.5 * dt * (dens[m + 1:] + dens[m:-1]))
    else:
        cum[1:] = np.cumsum(0.5 * dt * (dens[1:] + dens[:-1]))
    return tp, cum


def emitted_flux(traj: AmplitudeTrajectory, params: SystemParams, d: float, r: complex,
                 T: float) -> float:
    """Photon probability that has passed the detector at ``x0 + d`` by time ``T``."""
    jd = _lattice_steps(d, params, traj)
    jp = int(math.floor(T / traj.grid.dt + ALIGN_RTOL)) - jd
    if jp < 0:
        return 0.0
    if jp > traj.grid.n_steps:
        raise OutOfRangeError(f"T - d/v = {T - d / params.v!r} beyond horizon {traj.grid.t_max!r}")
    _, cum = flux_series(traj, params, d, r)
    return float(cum[jp])
