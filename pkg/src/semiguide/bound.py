"""Atom-photon bound state between the emitter and the mirror."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import quad

from .params import SystemParams, phase_is_trapping

Q_RESIDUAL_TOL = 1e-12


class NoBoundStateError(ValueError):
    pass


@dataclass(frozen=True)
class BoundState:
    """Bound state at the bare atomic energy.

    Attributes:
        q: Energy offset from the atomic line divided by ``v`` (always 0 here).
        eps_b: Overlap with the excited atom, chosen real and positive.
        field_norm_sq: Probability weight of the photon, ``1 - |eps_b|**2``.
        q_residual: Residual of the energy consistency equation at ``q``.
    """

    q: float
    eps_b: complex
    field_norm_sq: float
    q_residual: float

    @property
    def atomic_weight(self) -> float:
        return abs(self.eps_b) ** 2


def energy_residual(params: SystemParams, q: float) -> float:
    """``q + (G / 2v) sin(2 (k0 + q) x0)``; zero at a consistent energy."""
    return q + params.gamma / (2 * params.v) * math.sin(2 * (params.k0 + q) * params.x0)


def atomic_weight(params: SystemParams, q: float = 0.0) -> float:
    """Normalised atomic weight of the bound state, evaluated at energy offset ``q``."""
    return 1.0 / (1.0 + 0.5 * params.gamma_td * math.cos(2 * (params.k0 + q) * params.x0))


def bound_state_exists(params: SystemParams) -> BoundState | None:
    """The bound state if the round-trip phase is a multiple of 2*pi, else None.

    The energy is pinned to the atomic line (``q = 0``); the consistency
    equation is re-checked there and the state is withheld if it fails.
    """
    if params.x0 <= 0:
        raise ValueError("bound state needs x0 > 0")
    if not phase_is_trapping(params.phi):
        return None
    q = 0.0
    resid = energy_residual(params, q)
    if abs(resid) > Q_RESIDUAL_TOL:
        return None
    w = _trapped_weight(params)
    return BoundState(q=q, eps_b=complex(math.sqrt(w)), field_norm_sq=1.0 - w, q_residual=resid)


def _trapped_weight(params: SystemParams) -> float:
    # cos(2 k0 x0) == 1 on the trapping set; use the exact value
    return 1.0 / (1.0 + 0.5 * params.gamma * params.t_d)


@lru_cache(maxsize=64)
def _profile_amplitude(gamma: float, v: float, x0: float, k0: float) -> float:
    params = SystemParams(gamma, v, x0, k0)
    bs = bound_state_exists(params)
    if bs is None:
        raise NoBoundStateError(f"no bound state for phi={params.phi!r}")
    n_lobes = max(1, round(k0 * x0 / math.pi))
    integral, _ = quad(lambda x: math.sin(k0 * x) ** 2, 0.0, x0,
                       epsabs=0.0, epsrel=1e-10, limit=max(50, 20 * n_lobes))
    return math.sqrt(bs.field_norm_sq / integral)


def profile_amplitude(params: SystemParams) -> float:
    """Positive prefactor ``A`` with ``int_0^x0 |A sin(k0 x)|^2 dx = 1 - |eps_b|^2``."""
    return _profile_amplitude(params.gamma, params.v, params.x0, params.k0)


def bound_profile(params: SystemParams, x: float) -> float:
    """Photon part of the bound state in real space: ``A sin(k0 x)`` on ``[0, x0]``, zero beyond.

    Raises:
        NoBoundStateError: if the parameters do not support a bound state.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    amp = profile_amplitude(params)
    if x > params.x0:
        return 0.0
    return amp * math.sin(params.k0 * x)


def asymptotic_consistency(params: SystemParams) -> float:
    """``|eps_b|**2`` when the bound state exists, else 0.

    Coincides with the long-time atomic amplitude.
    """
    if params.x0 <= 0:
        return _trapped_weight(params) if phase_is_trapping(params.phi) else 0.0
    return 0.0 if bound_state_exists(params) is None else _trapped_weight(params)
