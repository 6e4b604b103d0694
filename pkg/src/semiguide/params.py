"""Physical parameters, time grids and atomic detuning profiles.

Units are whatever the caller picks; only the products ``gamma * t_d`` and the
round-trip phase ``phi`` enter the dynamics. The reduced constructor
:meth:`SystemParams.reduced` uses ``gamma = v = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

TWO_PI = 2.0 * math.pi
# phi counts as a multiple of 2*pi below this distance (radians)
PHASE_TOL = 1e-9
# relative slack when checking that grid points hit t_d exactly
ALIGN_RTOL = 1e-9


class InvalidParameterError(ValueError):
    """A physical parameter is outside its allowed range."""


class GridAlignmentError(ValueError):
    """The time step does not divide the delay into an even number of steps."""


def phase_is_trapping(phi: float, tol: float = PHASE_TOL) -> bool:
    """True when ``phi`` is a multiple of 2*pi within ``tol``."""
    r = math.remainder(phi, TWO_PI)
    return abs(r) < tol


@dataclass(frozen=True)
class SystemParams:
    """Emitter/waveguide constants.

    Attributes:
        gamma: Decay rate into the guide for an infinite waveguide. Zero is
            allowed and decouples the emitter.
        v: Photon group velocity.
        x0: Emitter-mirror distance.
        k0: Resonant wave vector.
    """

    gamma: float
    v: float
    x0: float
    k0: float

    def __post_init__(self):
        for name in ("gamma", "v", "x0", "k0"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or not math.isfinite(val):
                raise InvalidParameterError(f"{name} must be a finite number, got {val!r}")
        if self.gamma < 0:
            raise InvalidParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.v <= 0:
            raise InvalidParameterError(f"v must be > 0, got {self.v}")
        if self.x0 < 0:
            raise InvalidParameterError(f"x0 must be >= 0, got {self.x0}")
        if self.k0 <= 0:
            raise InvalidParameterError(f"k0 must be > 0, got {self.k0}")

    @property
    def t_d(self) -> float:
        """Round-trip delay emitter -> mirror -> emitter."""
        return 2.0 * self.x0 / self.v

    @property
    def phi(self) -> float:
        """Round-trip optical phase at resonance."""
        return 2.0 * self.k0 * self.x0

    @property
    def gamma_td(self) -> float:
        return self.gamma * self.t_d

    @property
    def trapping(self) -> bool:
        return self.x0 > 0 and phase_is_trapping(self.phi)

    @classmethod
    def reduced(cls, gamma_td: float, phi: float) -> "SystemParams":
        """Canonical parameters with ``gamma = v = 1`` for a given (gamma*t_d, phi).

        ``x0 = t_d / 2`` and ``k0 = phi' / (2 x0)`` where ``phi'`` is ``phi``
        folded into (0, 2*pi]; a trapping phase therefore maps to exactly
        ``k0 * x0 = pi``. With zero delay ``k0`` is set to 1 (it never enters).
        """
        if not math.isfinite(gamma_td) or gamma_td < 0:
            raise InvalidParameterError(f"gamma_td must be >= 0, got {gamma_td}")
        if not math.isfinite(phi):
            raise InvalidParameterError(f"phi must be finite, got {phi}")
        x0 = gamma_td / 2.0
        if x0 == 0.0:
            return cls(gamma=1.0, v=1.0, x0=0.0, k0=1.0)
        folded = phi % TWO_PI
        if phase_is_trapping(folded):
            folded = TWO_PI
        return cls(gamma=1.0, v=1.0, x0=x0, k0=folded / (2.0 * x0))


def derive(params: SystemParams) -> dict:
    """Delay ``t_d = 2 x0 / v`` and phase ``phi = 2 k0 x0``."""
    return {"t_d": params.t_d, "phi": params.phi}


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j * dt`` for ``j = 0 .. n_steps``."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidParameterError(f"dt must be > 0, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidParameterError(f"n_steps must be an integer >= 1, got {self.n_steps}")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def t_max(self) -> float:
        return self.dt * self.n_steps

    @classmethod
    def for_delay(cls, params: SystemParams, steps_per_delay: int, t_max: float) -> "TimeGrid":
        """Grid with ``dt = t_d / steps_per_delay`` covering at least ``[0, t_max]``."""
        if params.t_d <= 0:
            raise InvalidParameterError("for_delay needs a positive delay")
        dt = params.t_d / steps_per_delay
        return cls(dt=dt, n_steps=max(1, int(math.ceil(t_max / dt - ALIGN_RTOL))))

    def delay_steps(self, t_d: float) -> int | None:
        """Number of grid steps per delay, or None if the delay never acts.

        Raises:
            GridAlignmentError: when the delay is active on the grid but is not
                an even multiple of ``dt``.
        """
        if t_d <= 0 or t_d > self.t_max * (1 + ALIGN_RTOL):
            return None
        m = round(t_d / self.dt)
        if m < 1 or abs(m * self.dt - t_d) > ALIGN_RTOL * t_d:
            raise GridAlignmentError(
                f"dt={self.dt!r} does not divide t_d={t_d!r} into an integer number of steps")
        if m % 2:
            raise GridAlignmentError(f"t_d/dt = {m} must be even")
        return m

    def index(self, t: float) -> int:
        """Grid index of ``t``; raises if ``t`` is not a grid point."""
        j = round(t / self.dt)
        if abs(j * self.dt - t) > ALIGN_RTOL * max(self.dt, abs(t)):
            raise GridAlignmentError(f"t={t!r} is not on the grid (dt={self.dt!r})")
        return int(j)


# --- detuning profiles -----------------------------------------------------

@dataclass(frozen=True)
class Zero:
    kind = "zero"

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Step:
    """``delta`` on ``[t_on, t_off)``, zero elsewhere; ``t_off=None`` keeps it on."""

    t_on: float
    delta: float
    t_off: float | None = None
    kind = "step"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        on = t >= self.t_on
        if self.t_off is not None:
            on &= t < self.t_off
        return np.where(on, float(self.delta), 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t_on": self.t_on, "t_off": self.t_off, "delta": self.delta}

    @property
    def edges(self) -> tuple[float, ...]:
        return (self.t_on,) if self.t_off is None else (self.t_on, self.t_off)


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(2 pi (t - t_on) / period)`` after ``t_on``, zero before."""

    t_on: float
    amplitude: float
    period: float
    kind = "sinusoid"

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidParameterError(f"period must be > 0, got {self.period}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = self.amplitude * np.sin(TWO_PI * (t - self.t_on) / self.period)
        return np.where(t >= self.t_on, s, 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t_on": self.t_on, "amplitude": self.amplitude,
                "period": self.period}


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through ``(t, delta)`` samples; end values are held."""

    points: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    kind = "piecewise_linear"

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.points)
        if not pts:
            raise InvalidParameterError("piecewise_linear needs at least one point")
        ts = [p[0] for p in pts]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidParameterError("piecewise_linear times must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __call__(self, t):
        ts, ds = zip(*self.points)
        return np.interp(np.asarray(t, dtype=float), ts, ds)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "points": [list(p) for p in self.points]}


DetuningProfile = Union[Zero, Step, Sinusoid, PiecewiseLinear]


def detuning_eval(profile: DetuningProfile, t: float) -> float:
    """Atomic frequency shift of ``profile`` at time ``t >= 0``."""
    return float(profile(t))


def detuning_from_dict(d: dict) -> DetuningProfile:
    kind = d.get("kind", "zero")
    if kind == "zero":
        return Zero()
    if kind == "step":
        return Step(t_on=float(d["t_on"]), delta=float(d["delta"]),
                    t_off=None if d.get("t_off") is None else float(d["t_off"]))
    if kind == "sinusoid":
        return Sinusoid(t_on=float(d.get("t_on", 0.0)), amplitude=float(d["amplitude"]),
                        period=float(d["period"]))
    if kind == "piecewise_linear":
        return PiecewiseLinear(points=tuple(tuple(p) for p in d["points"]))
    raise InvalidParameterError(f"unknown detuning kind {kind!r}")


def is_zero(profile: DetuningProfile) -> bool:
    return isinstance(profile, Zero)
