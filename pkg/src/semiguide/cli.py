"""Command-line scenario runner.

    semiguide run CONFIG.json [--out DIR] [--seed N] [--realizations N] [--workers N]
    semiguide validate CONFIG.json
    semiguide --version

Every run writes one or more ``#``-commented CSV files and ``summary.json``
into the output directory. Output bytes depend only on the resolved config.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bound import bound_profile, bound_state_exists, asymptotic_consistency
from .config import SCHEMA_VERSION, ConfigError, ScenarioConfig, validate_config
from .dde import asymptotic_amplitude, solve_dde
from .field import field_map, flux_series, output_field_series
from .oracle import build_modes, integrate_micro
from .params import Step, Sinusoid, PiecewiseLinear, is_zero
from .stochastic import NOISE_SCHEME, RNG_SCHEME, ensemble_average

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def write_csv(path: Path, columns: dict[str, np.ndarray], meta: dict):
    """Write a CSV with ``# key: value`` metadata lines and ``%.17g`` numbers."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
    lines.append(",".join(names))
    body = "\n".join(",".join("%.17g" % x for x in row) for row in data)
    path.write_text("\n".join(lines) + "\n" + body + "\n")


def _meta(cfg: ScenarioConfig) -> dict:
    return {"tool": f"semiguide {__version__}", "schema_version": SCHEMA_VERSION,
            "scenario": cfg.scenario}


def _switch_on_time(detuning) -> float | None:
    if is_zero(detuning):
        return None
    if isinstance(detuning, (Step, Sinusoid)):
        return detuning.t_on
    if isinstance(detuning, PiecewiseLinear):
        nz = [t for t, d in detuning.points if d != 0]
        return nz[0] if nz else None
    return None


def _base_summary(cfg: ScenarioConfig) -> dict:
    p = cfg.params
    amp = asymptotic_amplitude(p)
    return {
        "asymptotic_amplitude": amp,
        "asymptotic_pe": amp ** 2,
        "trapped_probability": asymptotic_consistency(p),
        "t_d": p.t_d,
        "phi": p.phi,
        "gamma_td": p.gamma_td,
        "dt": cfg.grid.dt,
        "n_steps": cfg.grid.n_steps,
    }


def _field_outputs(cfg, traj, out: Path, r=1.0, name="output_field.csv"):
    tp, psi = output_field_series(traj, cfg.params, cfg.detector_d, r)
    _, cum = flux_series(traj, cfg.params, cfg.detector_d, r)
    cols = {"t": tp + cfg.detector_d / cfg.params.v, "t_prime": tp, "re_psi": psi.real,
            "im_psi": psi.imag, "intensity": np.abs(psi) ** 2, "flux": cum}
    if not is_zero(cfg.detuning):
        cols["detuning"] = cfg.detuning(tp)
    meta = _meta(cfg) | {"detector_d": cfg.detector_d,
                         "units": "psi in sqrt(gamma/v), intensity in gamma/v, times in 1/gamma"}
    write_csv(out / name, cols, meta)
    return tp, cum


def run_decay(cfg: ScenarioConfig, out: Path) -> dict:
    traj = solve_dde(cfg.params, cfg.grid, cfg.detuning)
    e = traj.values
    write_csv(out / "decay.csv", {"t": traj.times, "re_eps": e.real, "im_eps": e.imag,
                                  "pe": traj.pe}, _meta(cfg))
    s = _base_summary(cfg)
    _, cum = flux_series(traj, cfg.params, cfg.detector_d)
    s.update(pe_final=float(traj.pe[-1]), emitted_flux=float(cum[-1]))
    return s


def run_bound_state(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    s = _base_summary(cfg)
    bs = bound_state_exists(p)
    s["bound_state_exists"] = bs is not None
    traj = solve_dde(p, cfg.grid, cfg.detuning)
    unit = p.v * cfg.grid.dt
    xs = np.arange(0, int(round((p.x0 + cfg.detector_d) / unit)) + 1) * unit
    fm = field_map(traj, p, xs, [cfg.grid.t_max])
    meta = _meta(cfg) | {"snap_max": fm.max_snap, "lattice": f"x0 + j*v*dt, v*dt={unit!r}"}
    write_csv(out / "field_map.csv", {"x": fm.x, "t": np.full(fm.x.size, cfg.grid.t_max),
                                      "re_psi": fm.psi[0].real, "im_psi": fm.psi[0].imag,
                                      "intensity": fm.intensity[0]}, meta)
    if bs is not None:
        prof = np.array([bound_profile(p, x) for x in fm.x])
        write_csv(out / "bound_profile.csv", {"x": fm.x, "psi_b": prof}, _meta(cfg))
        s.update(q=bs.q, q_residual=bs.q_residual, eps_b_sq=bs.atomic_weight,
                 field_norm_sq=bs.field_norm_sq)
    s["pe_final"] = float(traj.pe[-1])
    return s


def run_output_field(cfg: ScenarioConfig, out: Path) -> dict:
    traj = solve_dde(cfg.params, cfg.grid, cfg.detuning)
    tp, cum = _field_outputs(cfg, traj, out)
    s = _base_summary(cfg)
    s.update(pe_final=float(traj.pe[-1]), emitted_flux=float(cum[-1]))
    t_on = _switch_on_time(cfg.detuning)
    if t_on is not None:
        j = min(int(math.floor(t_on / cfg.grid.dt + 1e-9)), cfg.grid.n_steps)
        s.update(switch_on=t_on, flux_before_switch=float(cum[j]),
                 flux_after_switch=float(cum[-1] - cum[j]))
    return s


def run_robustness(cfg: ScenarioConfig, out: Path, workers: int = 1) -> dict:
    res = ensemble_average(cfg.params, cfg.noise, cfg.grid, cfg.detuning, workers=workers)
    meta = _meta(cfg) | {"noise": cfg.noise.to_dict(), "noise_scheme": NOISE_SCHEME,
                         "rng": RNG_SCHEME}
    write_csv(out / "ensemble.csv", {"t": cfg.grid.times, "mean_pe": res.mean_pe,
                                     "stderr": res.stderr}, meta)
    s = _base_summary(cfg)
    s.update(pe_final=float(res.mean_pe[-1]), stderr_final=float(res.stderr[-1]),
             n_realizations=res.n_realizations, gamma_tot=cfg.noise.gamma_tot(cfg.params),
             reflection=[cfg.noise.r.real, cfg.noise.r.imag])
    return s


def run_oracle_check(cfg: ScenarioConfig, out: Path) -> dict:
    p = cfg.params
    modes = build_modes(p, cfg.oracle["n_modes"], cfg.oracle["K"])
    micro, state, drift = integrate_micro(modes, p, cfg.grid, cfg.detuning)
    ref = solve_dde(p, cfg.grid, cfg.detuning)
    dev = np.abs(micro.values - ref.values)
    write_csv(out / "oracle_check.csv",
              {"t": ref.times, "re_dde": ref.values.real, "im_dde": ref.values.imag,
               "re_oracle": micro.values.real, "im_oracle": micro.values.imag, "abs_dev": dev},
              _meta(cfg) | {"oracle": cfg.oracle})
    write_csv(out / "oracle_spectrum.csv",
              {"k": modes.k_values, "re": state.phi_k.real, "im": state.phi_k.imag}, _meta(cfg))
    s = _base_summary(cfg)
    s.update(max_abs_deviation=float(dev.max()), norm_drift=drift,
             recurrence_time=modes.recurrence_time, pe_final=float(ref.pe[-1]))
    return s


RUNNERS = {
    "decay": run_decay,
    "bound-state": run_bound_state,
    "output-field": run_output_field,
    "revival": run_output_field,
    "robustness": run_robustness,
    "oracle-check": run_oracle_check,
}


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> dict:
    """Run ``cfg`` and write its files; returns the summary record."""
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.scenario == "robustness":
        summary = run_robustness(cfg, out, workers)
    else:
        summary = RUNNERS[cfg.scenario](cfg, out)
    record = {
        "summary": summary,
        "resolved_config": cfg.to_dict(),
        "metadata": {
            "tool": "semiguide",
            "version": __version__,
            "schema_version": SCHEMA_VERSION,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "seed": None if cfg.noise is None else cfg.noise.master_seed,
            "noise_scheme": NOISE_SCHEME if cfg.scenario == "robustness" else None,
        },
    }
    (out / "summary.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return record


def _fail(code: str, message: str, status: int, errors=None):
    payload = {"code": code, "message": message}
    if errors is not None:
        payload["errors"] = errors
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return status


def _load(path: str) -> ScenarioConfig:
    return validate_config(Path(path).read_text())


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    changes = {}
    if args.out is not None:
        changes["output_path"] = args.out
    if cfg.noise is not None and (args.seed is not None or args.realizations is not None):
        nz = cfg.noise
        if args.seed is not None:
            nz = dataclasses.replace(nz, master_seed=args.seed)
        if args.realizations is not None:
            nz = dataclasses.replace(nz, n_realizations=args.realizations)
        changes["noise"] = nz
    return dataclasses.replace(cfg, **changes) if changes else cfg


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="semiguide",
                                 description="Emitter in front of a mirror: scenario runner")
    ap.add_argument("--version", action="version",
                    version=f"semiguide {__version__} (config schema {SCHEMA_VERSION})")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (overrides output_path)")
    run.add_argument("--seed", type=int, default=None, help="master seed for noise")
    run.add_argument("--realizations", type=int, default=None)
    run.add_argument("--workers", type=int, default=1, help="processes for ensembles")
    val = sub.add_parser("validate", help="validate a config and print its resolved form")
    val.add_argument("config")
    args = ap.parse_args(argv)

    try:
        cfg = _load(args.config)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG, exc.errors)

    if args.command == "validate":
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return 0

    try:
        cfg = _apply_overrides(cfg, args)
    except ValueError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    try:
        record = run_scenario(cfg, workers=args.workers)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    except (ValueError, ArithmeticError, IndexError) as exc:
        return _fail("numeric", f"{type(exc).__name__}: {exc}", EXIT_NUMERIC)
    print(json.dumps(record["summary"], sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
