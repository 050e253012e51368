"""Command-line front end: equilibrium curves, Bode/passivity sweeps,
closed-loop simulations, and torque-deflection map fitting.

All commands read one JSON config file (every field optional, defaults are
the nominal boom) plus a few flag overrides, write CSV outputs atomically
(write-temp-then-rename), and drop a machine-readable ``summary.json``
next to them.  Exit code 0 means every requested check or run succeeded;
config and schema problems exit with 2, runtime failures with 1.  A
simulation that ends in divergence is a recorded outcome, not a failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .calibration import MeasurementSet, RankDeficient, fit_map, select_degree
from .control import (ControllerConfig, FeedforwardProfile, PDGains,
                      ReferenceTrajectory)
from .equilibrium import (DEFAULT_TENSION_MAX, NearSingularStiffness,
                          OutOfRange, deflection_curve, solve_equilibrium)
from .linearization import linearize
from .model import BasisSet, BoomParams, assemble_matrices
from .passivity import (default_grid, frequency_response, mode_count_sweep,
                        passivity_check, scaling_factory, uncertainty_sweep)
from .sim import SCENARIO_NAMES, SimScenario, run_simulation, scenario_suite

__all__ = ["main", "ConfigError", "load_config"]

ENV_OUTPUT_DIR = "FLEXBOOM_OUT"

PROFILE_UNITS = {
    "simulation-SI": ("N", "m"),
    "prototype-units": ("Nm", "mm"),
}


class ConfigError(ValueError):
    """Invalid configuration file or flag combination."""


_SCHEMA: dict[str, Any] = {
    "boom": {
        "length": float,
        "linear_density": float,
        "elastic_modulus": float,
        "second_moment": float,
        "cable_offset": float,
        "spreader_count": int,
        "node_spacing": float,
    },
    "modes": int,
    "unit_profile": str,
    "output_dir": str,
    "equilibrium": {"t_max": float, "samples": int},
    "bode": {
        "omega_min": float,
        "omega_max": float,
        "grid_points": int,
        "eps_tol": float,
    },
    "controller": {
        "gains": {"k_p": float, "k_d": float},
        "feedforward": {
            "mode": str,
            "tension_final": float,
            "tension_initial": float,
            "duration": float,
        },
        "reference": {
            "mode": str,
            "w_final": (float, type(None)),
            "w_initial": (float, type(None)),
            "duration": float,
            "map_coefficients": list,
            "map_units": list,
        },
        "clamp_nonnegative": bool,
    },
    "simulation": {
        "w_init": float,
        "duration": float,
        "dt": float,
        "decimation": int,
        "scenario": (str, type(None)),
    },
}


def _default_config() -> dict:
    return {
        "boom": {
            "length": 29.4,
            "linear_density": 0.1,
            "elastic_modulus": 228e9,
            "second_moment": 4.99e-10,
            "cable_offset": 0.1,
            "spreader_count": 10,
            "node_spacing": 2.94,
        },
        "modes": 3,
        "unit_profile": "simulation-SI",
        "output_dir": "out",
        "equilibrium": {"t_max": DEFAULT_TENSION_MAX, "samples": 200},
        "bode": {
            "omega_min": 1e-3,
            "omega_max": 1e3,
            "grid_points": 2000,
            "eps_tol": 1e-9,
        },
        "controller": {
            "gains": {"k_p": 10.0, "k_d": 25.0},
            "feedforward": {
                "mode": "constant",
                "tension_final": 1.0,
                "tension_initial": 0.0,
                "duration": 100.0,
            },
            "reference": {
                "mode": "constant",
                "w_final": None,
                "w_initial": None,
                "duration": 100.0,
                "map_coefficients": [],
                "map_units": [],
            },
            "clamp_nonnegative": False,
        },
        "simulation": {
            "w_init": 1.0,
            "duration": 200.0,
            "dt": 1e-3,
            "decimation": 100,
            "scenario": None,
        },
    }


def _validate(user: Any, schema: Any, path: str) -> None:
    if isinstance(schema, dict):
        if not isinstance(user, dict):
            raise ConfigError(f"{path or 'config'}: expected an object, got {type(user).__name__}")
        for key, value in user.items():
            if key not in schema:
                raise ConfigError(f"unknown config key '{path + key}'")
            _validate(value, schema[key], path + key + ".")
        return
    allowed = schema if isinstance(schema, tuple) else (schema,)
    label = path.rstrip(".")
    if isinstance(user, bool) and bool not in allowed:
        raise ConfigError(f"{label}: boolean not allowed here")
    for kind in allowed:
        if kind is float and isinstance(user, (int, float)) and not isinstance(user, bool):
            return
        if kind is not float and isinstance(user, kind):
            return
    names = "/".join("null" if k is type(None) else k.__name__ for k in allowed)
    raise ConfigError(f"{label}: expected {names}, got {type(user).__name__}")


def _merge(base: dict, user: dict) -> dict:
    merged = dict(base)
    for key, value in user.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            merged[key] = _merge(base[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: str | Path | None) -> dict:
    """Load, validate, and default-fill a JSON run configuration."""
    config = _default_config()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
        _validate(user, _SCHEMA, "")
        config = _merge(config, user)
    profile = config["unit_profile"]
    if profile not in PROFILE_UNITS:
        raise ConfigError(
            f"unit_profile must be one of {sorted(PROFILE_UNITS)}, got {profile!r}")
    return config


def _boom_params(config: dict) -> BoomParams:
    try:
        return BoomParams(**config["boom"])
    except ValueError as exc:
        raise ConfigError(f"boom: {exc}") from exc


def _build_model(config: dict):
    return assemble_matrices(_boom_params(config),
                             BasisSet.with_mode_count(config["modes"]))


def _output_dir(config: dict, args: argparse.Namespace) -> Path:
    if getattr(args, "out", None):
        out = Path(args.out)
    elif os.environ.get(ENV_OUTPUT_DIR):
        out = Path(os.environ[ENV_OUTPUT_DIR])
    else:
        out = Path(config["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv_atomic(path: Path, header: Sequence[str],
                      rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _write_text_atomic(path, "\n".join(lines) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write_summary(outdir: Path, payload: dict) -> Path:
    path = outdir / "summary.json"
    _write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# equilibrium


def cmd_equilibrium(config: dict, args: argparse.Namespace) -> int:
    model = _build_model(config)
    outdir = _output_dir(config, args)
    t_max = float(config["equilibrium"]["t_max"])
    summary: dict[str, Any] = {"command": "equilibrium", "ok": True, "outputs": []}

    if args.tension is not None:
        tension = float(args.tension)
        if not 0.0 <= tension <= t_max:
            raise OutOfRange(
                f"tension {tension} N outside the verified range [0, {t_max}] N")
        point = solve_equilibrium(model, tension)
        print(f"tension {point.tension:.6g} N -> tip deflection "
              f"{point.tip_deflection:.9g} m")
        summary["point"] = {
            "tension_N": point.tension,
            "tip_deflection_m": point.tip_deflection,
            "modal_coords": [float(v) for v in point.modal_coords],
        }
    else:
        samples = int(config["equilibrium"]["samples"])
        points = deflection_curve(model, t_max=t_max, samples=samples)
        n = model.mode_count
        header = ["tension_N", "tip_deflection_m"] + [f"q_{i+1}" for i in range(n)]
        rows = [[p.tension, p.tip_deflection, *map(float, p.modal_coords)]
                for p in points]
        path = outdir / "equilibrium_curve.csv"
        _write_csv_atomic(path, header, rows)
        print(f"wrote {path} ({len(rows)} rows)")
        summary["outputs"].append(str(path))
        summary["curve"] = {
            "samples": samples,
            "t_max_N": t_max,
            "w_at_t_max_m": points[-1].tip_deflection,
        }
    _write_summary(outdir, summary)
    return 0


# ---------------------------------------------------------------------------
# bode


def _report_row(report) -> list:
    meta = report.metadata
    return [
        meta.get("e_scale", 1.0), meta.get("rho_scale", 1.0),
        meta.get("i_scale", 1.0), meta.get("mode_count", ""),
        meta.get("t_eq", ""), report.verdict,
        report.worst_phase_deg, report.worst_phase_omega,
        report.min_real, report.min_real_omega,
        meta.get("nudged_points", 0),
    ]


_SWEEP_HEADER = [
    "e_scale", "rho_scale", "i_scale", "mode_count", "t_eq_N", "verdict",
    "worst_phase_deg", "worst_phase_omega_rad_s", "min_re",
    "min_re_omega_rad_s", "nudged_points",
]


def cmd_bode(config: dict, args: argparse.Namespace) -> int:
    params = _boom_params(config)
    model = _build_model(config)
    outdir = _output_dir(config, args)
    bode_cfg = config["bode"]
    grid = default_grid(int(bode_cfg["grid_points"]), float(bode_cfg["omega_min"]),
                        float(bode_cfg["omega_max"]))
    eps_tol = float(bode_cfg["eps_tol"])
    t_eq = float(args.teq)
    t_max = float(config["equilibrium"]["t_max"])
    if not 0.0 <= t_eq <= t_max:
        raise OutOfRange(f"t_eq {t_eq} N outside the verified range [0, {t_max}] N")

    eq = solve_equilibrium(model, t_eq)
    ss = linearize(model, eq)
    fr = frequency_response(ss, grid)
    report = passivity_check(ss, grid, eps_tol)

    bode_path = outdir / f"bode_teq_{t_eq:g}.csv"
    rows = list(zip(fr.omega, fr.response.real, fr.response.imag,
                    fr.magnitude_db, fr.phase_deg))
    _write_csv_atomic(bode_path, ["omega_rad_s", "re", "im", "mag_db", "phase_deg"], rows)
    print(f"wrote {bode_path}; nominal plant at {t_eq:g} N is {report.verdict}")

    summary: dict[str, Any] = {
        "command": "bode", "outputs": [str(bode_path)],
        "t_eq_N": t_eq, "nominal_verdict": report.verdict,
        "worst_phase_deg": report.worst_phase_deg,
        "min_re": report.min_real,
    }
    ok = report.passive
    if args.dump_ss:
        dump_path = outdir / args.dump_ss
        dump_rows = []
        for name, matrix in (("A", ss.a), ("B", ss.b.reshape(-1, 1)),
                             ("C", ss.c.reshape(1, -1)), ("D", np.array([[ss.d]]))):
            for i in range(matrix.shape[0]):
                for j in range(matrix.shape[1]):
                    dump_rows.append([name, i, j, float(matrix[i, j])])
        _write_csv_atomic(dump_path, ["matrix", "row", "col", "value"], dump_rows)
        summary["outputs"].append(str(dump_path))

    if args.sweep == "uncertainty":
        pct = float(args.pct) / 100.0
        factory = scaling_factory(params, model.basis)
        reports = uncertainty_sweep(factory, t_eq, pct, int(args.samples),
                                    grid, eps_tol)
        path = outdir / "sweep_uncertainty.csv"
        _write_csv_atomic(path, _SWEEP_HEADER, [_report_row(r) for r in reports])
        all_passive = all(r.passive for r in reports)
        ok = ok and all_passive
        summary["outputs"].append(str(path))
        summary["uncertainty_sweep"] = {
            "samples": len(reports), "perturbation_pct": float(args.pct),
            "all_passive": all_passive,
        }
        print(f"uncertainty sweep: {len(reports)} samples, "
              f"{'all passive' if all_passive else 'NOT all passive'}")
    elif args.sweep == "modes":
        counts = [int(v) for v in args.modes.split(",")]
        reports = mode_count_sweep(params, counts, t_eq, grid, eps_tol)
        path = outdir / "sweep_modes.csv"
        _write_csv_atomic(path, _SWEEP_HEADER, [_report_row(r) for r in reports])
        all_passive = all(r.passive for r in reports)
        ok = ok and all_passive
        summary["outputs"].append(str(path))
        summary["mode_sweep"] = {"mode_counts": counts, "all_passive": all_passive}
        print(f"mode-count sweep over {counts}: "
              f"{'all passive' if all_passive else 'NOT all passive'}")

    summary["ok"] = ok
    _write_summary(outdir, summary)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# simulate


def _reference_from_config(ref_cfg: dict, model, ff: FeedforwardProfile,
                           w_init: float, profile: str) -> ReferenceTrajectory:
    mode = ref_cfg["mode"]
    w_final = ref_cfg["w_final"]
    if w_final is None and mode != "map-composed":
        w_final = solve_equilibrium(model, ff.tension_final).tip_deflection
    w_initial = ref_cfg["w_initial"]
    if w_initial is None:
        w_initial = w_init
    if mode == "constant":
        return ReferenceTrajectory.constant(float(w_final))
    if mode == "quintic-deflection":
        return ReferenceTrajectory.quintic(float(w_initial), float(w_final),
                                           float(ref_cfg["duration"]))
    if mode == "map-composed":
        coeffs = ref_cfg["map_coefficients"]
        if not coeffs:
            raise ConfigError("controller.reference.map_coefficients is empty "
                              "but mode is map-composed")
        units = ref_cfg.get("map_units") or []
        if units:
            expected = PROFILE_UNITS[profile]
            if tuple(units) != expected:
                raise ConfigError(
                    f"map units {units} inconsistent with unit profile "
                    f"{profile!r} (expected {list(expected)})")
        return ReferenceTrajectory.map_composed([float(c) for c in coeffs])
    raise ConfigError(f"unknown reference mode {mode!r}")


def _controller_from_config(config: dict, model, w_init: float) -> ControllerConfig:
    ctrl = config["controller"]
    try:
        gains = PDGains(**ctrl["gains"])
        ff_cfg = ctrl["feedforward"]
        ff = FeedforwardProfile(
            mode=ff_cfg["mode"],
            tension_final=float(ff_cfg["tension_final"]),
            tension_initial=float(ff_cfg["tension_initial"]),
            duration=float(ff_cfg["duration"]),
        )
        reference = _reference_from_config(ctrl["reference"], model, ff, w_init,
                                           config["unit_profile"])
        return ControllerConfig(
            gains=gains, feedforward=ff, reference=reference,
            clamp_nonnegative=bool(ctrl["clamp_nonnegative"]),
        )
    except ValueError as exc:
        raise ConfigError(f"controller: {exc}") from exc


def cmd_simulate(config: dict, args: argparse.Namespace) -> int:
    sim_cfg = dict(config["simulation"])
    if args.duration is not None:
        sim_cfg["duration"] = float(args.duration)
    if args.dt is not None:
        sim_cfg["dt"] = float(args.dt)
    scenario_name = args.scenario or sim_cfg.get("scenario")
    outdir = _output_dir(config, args)

    if scenario_name is not None:
        if scenario_name not in SCENARIO_NAMES:
            raise ConfigError(
                f"unknown scenario {scenario_name!r}; pick one of {SCENARIO_NAMES}")
        suite = scenario_suite(
            params=_boom_params(config), mode_count=int(config["modes"]),
            w_init=float(sim_cfg["w_init"]), duration=float(sim_cfg["duration"]),
            dt=float(sim_cfg["dt"]),
        )
        scenario = next(s for s in suite if s.name == scenario_name)
        scenario = SimScenario(
            model=scenario.model, controller=scenario.controller,
            w_init=scenario.w_init, duration=scenario.duration, dt=scenario.dt,
            decimation=int(sim_cfg["decimation"]), name=scenario.name,
        )
    else:
        model = _build_model(config)
        controller = _controller_from_config(config, model,
                                             float(sim_cfg["w_init"]))
        scenario = SimScenario(
            model=model, controller=controller, w_init=float(sim_cfg["w_init"]),
            duration=float(sim_cfg["duration"]), dt=float(sim_cfg["dt"]),
            decimation=int(sim_cfg["decimation"]), name="custom",
        )

    result = run_simulation(scenario)
    n = scenario.model.mode_count
    stem = f"sim_{result.scenario_name}"

    header = (["t_s", "w_tip_m", "wdot_tip_m_s", "u_N", "T_des_N", "w_des_m"]
              + [f"q_{i+1}" for i in range(n)] + ["KE_J", "PE_J"])
    rows = []
    for i in range(result.time.size):
        rows.append([result.time[i], result.tip[i], result.tip_rate[i],
                     result.u[i], result.t_des[i], result.w_des[i],
                     *map(float, result.q[i]), result.kinetic[i],
                     result.potential[i]])
    csv_path = outdir / f"{stem}.csv"
    _write_csv_atomic(csv_path, header, rows)

    control_path = outdir / f"{stem}_control.csv"
    control_rows = list(zip(result.time, result.t_des, result.w_des,
                            result.w_rate_des, result.u_unclamped, result.u))
    _write_csv_atomic(control_path,
                      ["t_s", "T_des", "w_des", "wdot_des", "u_preclamp", "u"],
                      control_rows)

    meta_lines = [
        f"scenario={result.scenario_name}",
        f"status={result.status}",
        f"divergence_time_s={'' if result.divergence_time is None else result.divergence_time}",
        f"duration_s={scenario.duration}",
        f"dt_s={scenario.dt}",
        f"w_init_m={scenario.w_init}",
        f"rows={result.time.size}",
    ]
    meta_path = outdir / f"{stem}.meta"
    _write_text_atomic(meta_path, "\n".join(meta_lines) + "\n")

    print(f"wrote {csv_path}; status={result.status}"
          + (f" at t={result.divergence_time:.3f} s" if result.diverged else ""))
    _write_summary(outdir, {
        "command": "simulate", "ok": True,
        "outputs": [str(csv_path), str(control_path), str(meta_path)],
        "scenario": result.scenario_name, "status": result.status,
        "divergence_time_s": result.divergence_time,
        "final_tip_m": float(result.tip[-1]),
    })
    return 0


# ---------------------------------------------------------------------------
# fit


def cmd_fit(config: dict, args: argparse.Namespace) -> int:
    outdir = _output_dir(config, args)
    data = MeasurementSet.from_csv(args.data)
    profile = config["unit_profile"]
    expected = PROFILE_UNITS[profile]
    if (data.torque_unit, data.deflection_unit) != expected:
        raise ConfigError(
            f"data units ({data.torque_unit}, {data.deflection_unit}) do not "
            f"match unit profile {profile!r} (expected {expected})")

    if args.degree == "auto":
        best, residuals = select_degree(data)
    else:
        best = int(args.degree)
        residuals = {best: fit_map(data, best).residual_rms}
    fitted = fit_map(data, best)

    fragment = {
        "reference": {
            "mode": "map-composed",
            "map_coefficients": list(fitted.coefficients),
            "map_units": [fitted.torque_unit, fitted.deflection_unit],
        },
        "map": {
            "degree": fitted.degree,
            "residual_rms": fitted.residual_rms,
            "fit_range": list(fitted.fit_range),
            "torque_unit": fitted.torque_unit,
            "deflection_unit": fitted.deflection_unit,
            "per_degree_residual_rms": {str(k): v for k, v in sorted(residuals.items())},
        },
    }
    path = outdir / "fit_map.json"
    _write_text_atomic(path, json.dumps(fragment, indent=2) + "\n")
    print(f"wrote {path}; degree {fitted.degree}, "
          f"residual RMS {fitted.residual_rms:.6g} {fitted.deflection_unit}")
    _write_summary(outdir, {
        "command": "fit", "ok": True, "outputs": [str(path)],
        "degree": fitted.degree, "residual_rms": fitted.residual_rms,
        "per_degree_residual_rms": {str(k): v for k, v in sorted(residuals.items())},
    })
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument("--out", help=f"output directory (overrides config and ${ENV_OUTPUT_DIR})")

    parser = argparse.ArgumentParser(
        prog="flexboom",
        description="Cable-actuated flexible boom analysis and simulation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eq = sub.add_parser("equilibrium", parents=[common],
                          help="tension-deflection equilibrium curve or single point")
    p_eq.add_argument("--tension", type=float,
                      help="report the single equilibrium at this tension (N)")
    p_eq.set_defaults(func=cmd_equilibrium)

    p_bode = sub.add_parser("bode", parents=[common],
                            help="frequency response and passivity certification")
    p_bode.add_argument("--teq", type=float, default=0.0,
                        help="equilibrium tension to linearize about (N)")
    p_bode.add_argument("--sweep", choices=["uncertainty", "modes"],
                        help="run a robustness sweep instead of just the nominal plant")
    p_bode.add_argument("--pct", type=float, default=20.0,
                        help="uncertainty box half-width in percent")
    p_bode.add_argument("--samples", type=int, default=125,
                        help="uncertainty sweep sample count (rounded to a cube)")
    p_bode.add_argument("--modes", default="3,4,5,6",
                        help="comma-separated mode counts for --sweep modes")
    p_bode.add_argument("--dump-ss", metavar="FILE",
                        help="also dump the state-space matrices to FILE (CSV)")
    p_bode.set_defaults(func=cmd_bode)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="closed-loop simulation (benchmark scenario or custom)")
    p_sim.add_argument("--scenario", choices=list(SCENARIO_NAMES),
                       help="run a named benchmark scenario")
    p_sim.add_argument("--duration", type=float, help="override run duration (s)")
    p_sim.add_argument("--dt", type=float, help="override integrator step (s)")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit a polynomial torque-to-deflection map from CSV data")
    p_fit.add_argument("data", help="CSV file with header torque_<unit>,deflection_<unit>")
    p_fit.add_argument("--degree", default="auto", choices=["auto", "1", "2", "3"],
                       help="polynomial degree (auto selects by residual)")
    p_fit.set_defaults(func=cmd_fit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OutOfRange, NearSingularStiffness, RankDeficient, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
