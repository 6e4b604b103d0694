"""Scenario configuration: JSON parsing, validation and canonical form."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .params import (
    InvalidParameterError,
    SystemParams,
    TimeGrid,
    detuning_from_dict,
    DetuningProfile,
    Zero,
)
from .stochastic import NoiseParams
from .oracle import DEFAULT_K, DEFAULT_N_MODES, MAX_PHASE_PER_STEP

SCHEMA_VERSION = 1
SCENARIOS = ("decay", "bound-state", "output-field", "revival", "robustness", "oracle-check")
DEFAULT_STEPS_PER_DELAY = 200


class ConfigError(ValueError):
    """Validation failed; ``errors`` lists every ``{"path", "message"}`` found."""

    def __init__(self, errors: list[dict]):
        self.errors = errors
        super().__init__("; ".join(f"{e['path']}: {e['message']}" for e in errors))


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: SystemParams
    grid: TimeGrid
    steps_per_delay: int
    t_max_gamma: float
    detuning: DetuningProfile = field(default_factory=Zero)
    noise: NoiseParams | None = None
    detector_d: float | None = None
    oracle: dict | None = None
    output_path: str = "out"
    reduced: dict | None = None

    def to_dict(self) -> dict:
        """Fully resolved config; validating it again yields an identical object."""
        d: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "params": {"gamma": self.params.gamma, "v": self.params.v,
                       "x0": self.params.x0, "k0": self.params.k0},
            "grid": {"steps_per_delay": self.steps_per_delay, "t_max_gamma": self.t_max_gamma},
            "detuning": self.detuning.to_dict(),
            "output_path": self.output_path,
        }
        if self.reduced is not None:
            d["reduced_from"] = dict(self.reduced)
        if self.noise is not None:
            d["noise"] = self.noise.to_dict()
        if self.detector_d is not None:
            d["detector_d"] = self.detector_d
        if self.oracle is not None:
            d["oracle"] = dict(self.oracle)
        return d


class _Collector:
    def __init__(self):
        self.errors: list[dict] = []

    def add(self, path: str, message: str):
        self.errors.append({"path": path, "message": message})

    def number(self, obj: dict, key: str, path: str, *, required=True, minimum=None,
               exclusive=False, default=None):
        if key not in obj or obj[key] is None:
            if required:
                self.add(f"{path}.{key}" if path else key, "required")
            return default
        val = obj[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            self.add(f"{path}.{key}" if path else key, f"must be a finite number, got {val!r}")
            return default
        if minimum is not None and (val <= minimum if exclusive else val < minimum):
            op = ">" if exclusive else ">="
            self.add(f"{path}.{key}" if path else key, f"must be {op} {minimum}, got {val!r}")
            return default
        return float(val)

    def integer(self, obj: dict, key: str, path: str, *, required=True, minimum=None, default=None):
        if key not in obj or obj[key] is None:
            if required:
                self.add(f"{path}.{key}", "required")
            return default
        val = obj[key]
        if isinstance(val, bool) or not isinstance(val, int):
            self.add(f"{path}.{key}", f"must be an integer, got {val!r}")
            return default
        if minimum is not None and val < minimum:
            self.add(f"{path}.{key}", f"must be >= {minimum}, got {val!r}")
            return default
        return val


def _params(c: _Collector, raw: Any):
    if not isinstance(raw, dict):
        c.add("params", "required object")
        return None, None
    if "gamma_td" in raw or "phi" in raw:
        extra = set(raw) & {"gamma", "v", "x0", "k0"}
        if extra:
            c.add("params", f"mixes reduced and full forms ({sorted(extra)})")
            return None, None
        gtd = c.number(raw, "gamma_td", "params", minimum=0)
        phi = c.number(raw, "phi", "params")
        if gtd is None or phi is None:
            return None, None
        return SystemParams.reduced(gtd, phi), {"gamma_td": gtd, "phi": phi}
    vals = {
        "gamma": c.number(raw, "gamma", "params", minimum=0, exclusive=True),
        "v": c.number(raw, "v", "params", minimum=0, exclusive=True),
        "x0": c.number(raw, "x0", "params", minimum=0),
        "k0": c.number(raw, "k0", "params", minimum=0, exclusive=True),
    }
    if any(v is None for v in vals.values()):
        return None, None
    return SystemParams(**vals), None


def validate_dict(doc: Any) -> ScenarioConfig:
    """Validate a parsed config document; raises :class:`ConfigError` with all problems."""
    c = _Collector()
    if not isinstance(doc, dict):
        raise ConfigError([{"path": "", "message": "config must be a JSON object"}])
    if "resolved_config" in doc:
        doc = doc["resolved_config"]
        if not isinstance(doc, dict):
            raise ConfigError([{"path": "resolved_config", "message": "must be an object"}])

    ver = doc.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        c.add("schema_version", f"unsupported version {ver!r} (expected {SCHEMA_VERSION})")

    scenario = doc.get("scenario")
    if scenario is None:
        c.add("scenario", "required")
    elif scenario not in SCENARIOS:
        c.add("scenario", f"must be one of {list(SCENARIOS)}, got {scenario!r}")
        scenario = None

    try:
        params, reduced = _params(c, doc.get("params"))
    except InvalidParameterError as exc:
        c.add("params", str(exc))
        params, reduced = None, None
    if reduced is None and isinstance(doc.get("reduced_from"), dict):
        reduced = dict(doc["reduced_from"])

    grid_raw = doc.get("grid", {})
    if not isinstance(grid_raw, dict):
        c.add("grid", "must be an object")
        grid_raw = {}
    m = c.integer(grid_raw, "steps_per_delay", "grid", required=False, minimum=2,
                  default=DEFAULT_STEPS_PER_DELAY)
    if m is not None and m % 2:
        c.add("grid.steps_per_delay", f"must be even for the RK4 method-of-steps stepper, got {m}")
        m = None
    t_max_gamma = c.number(grid_raw, "t_max_gamma", "grid", minimum=0, exclusive=True)

    detuning: DetuningProfile = Zero()
    if doc.get("detuning") is not None:
        try:
            detuning = detuning_from_dict(doc["detuning"])
        except (KeyError, TypeError, ValueError) as exc:
            c.add("detuning", f"invalid profile: {exc}")

    noise = None
    if doc.get("noise") is not None:
        nraw = doc["noise"]
        if not isinstance(nraw, dict):
            c.add("noise", "must be an object")
        else:
            kw = {
                "gamma_ext": c.number(nraw, "gamma_ext", "noise", required=False, minimum=0, default=0.0),
                "R": c.number(nraw, "R", "noise", required=False, minimum=0, default=1.0),
                "delta_omega": c.number(nraw, "delta_omega", "noise", required=False, minimum=0,
                                        default=0.0),
                "n_realizations": c.integer(nraw, "n_realizations", "noise", required=False,
                                            minimum=1, default=100),
                "master_seed": c.integer(nraw, "master_seed", "noise", required=False, default=0),
            }
            if kw["R"] is not None and kw["R"] > 1:
                c.add("noise.R", f"must be <= 1, got {kw['R']}")
            elif None not in kw.values():
                noise = NoiseParams(**kw)
    elif scenario == "robustness":
        c.add("noise", "required for scenario 'robustness'")

    oracle = None
    if scenario == "oracle-check" or doc.get("oracle") is not None:
        oraw = doc.get("oracle") or {}
        if not isinstance(oraw, dict):
            c.add("oracle", "must be an object")
            oraw = {}
        n_modes = c.integer(oraw, "n_modes", "oracle", required=False, minimum=3,
                            default=DEFAULT_N_MODES)
        K = c.number(oraw, "K", "oracle", required=False, minimum=0, exclusive=True,
                     default=DEFAULT_K)
        if n_modes is not None and n_modes % 2 == 0:
            c.add("oracle.n_modes", f"must be odd so k0 is a grid point, got {n_modes}")
        oracle = {"n_modes": n_modes, "K": K}

    output_path = doc.get("output_path", f"out/{scenario or 'run'}")
    if not isinstance(output_path, str) or not output_path:
        c.add("output_path", "must be a non-empty string")

    grid = None
    detector_d = None
    if params is not None and m is not None and t_max_gamma is not None:
        if params.gamma == 0:
            c.add("params.gamma", "must be > 0 (the horizon is given in units of 1/gamma)")
        else:
            t_max = t_max_gamma / params.gamma
            if params.t_d > 0:
                dt = params.t_d / m
            else:
                # no delay: steps_per_delay counts steps per 1/gamma
                dt = 1.0 / (params.gamma * m)
            grid = TimeGrid(dt=dt, n_steps=max(1, int(math.ceil(t_max / dt - 1e-9))))
            unit = params.v * dt
            if "detector_d" in doc and doc["detector_d"] is not None:
                detector_d = c.number(doc, "detector_d", "", minimum=0, exclusive=True)
                if detector_d is not None:
                    j = round(detector_d / unit)
                    if j < 1 or abs(j * unit - detector_d) > 1e-9 * detector_d:
                        c.add("detector_d", f"must be a positive multiple of v*dt = {unit!r}")
            elif scenario in ("output-field", "revival", "bound-state", "decay"):
                detector_d = params.x0 if params.x0 > 0 else m * unit
            if scenario == "oracle-check" and oracle and oracle.get("K"):
                if dt * params.v * oracle["K"] > MAX_PHASE_PER_STEP:
                    c.add("grid.steps_per_delay",
                          f"dt*v*K = {dt * params.v * oracle['K']:.3g} exceeds "
                          f"{MAX_PHASE_PER_STEP}; raise steps_per_delay")
    if scenario == "bound-state" and params is not None and params.x0 <= 0:
        c.add("params", "bound-state scenario needs a positive atom-mirror distance")

    if c.errors:
        raise ConfigError(c.errors)
    return ScenarioConfig(scenario=scenario, params=params, grid=grid, steps_per_delay=m,
                          t_max_gamma=t_max_gamma, detuning=detuning, noise=noise,
                          detector_d=detector_d, oracle=oracle, output_path=output_path,
                          reduced=reduced)


def validate_config(raw: str) -> ScenarioConfig:
    """Parse and validate a JSON config document.

    Raises:
        ConfigError: listing every structural and semantic problem.
    """
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError([{"path": "", "message": f"invalid JSON: {exc}"}]) from None
    return validate_dict(doc)
