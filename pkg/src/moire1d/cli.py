"""Command-line front end.

Every command reads one JSON config (optional; defaults are built in),
applies flat dotted-path overrides from ``--set``, writes its CSV/JSON
tables and a rendered figure into ``--out``, and drops a run manifest.

Exit codes: 0 ok, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import copy
import datetime
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields

import click
import numpy as np

from . import __version__, report
from .fitting import FitError
from .interferometer import FieldConfig, SequenceConfig, run_sequence
from .params import ModelParams, default_grid
from .pattern import generate_pattern
from .pipeline import run_t2_scan, scan_to_json
from .rigidity import (TrajectoryParams, experimental_trajectory, km_surface,
                       jump_vs_periods, visibility_model)
from .spectral import analytic_aft, numerical_spectrum, solve_km, solve_km_fixed_dz
from .wavepacket import GaussianWavepacket
from .wigner import verify_rotation_theorem, wigner_of_superposition

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


# -- config plumbing -------------------------------------------------------

_DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "pattern": {
        "kappa": 0.2, "delta_phi": 4 * math.pi, "n_p": 5.61,
        "theta": 0.0, "z_center": 0.0, "n_points": 4096,
    },
    "surface": {
        "kappa_min": 0.05, "kappa_max": 0.4, "n_kappa": 60,
        "dphi_min": 0.5, "dphi_max": 12 * math.pi, "n_dphi": 240,
        "n_p": 5.61, "overlay_trajectory": True,
        "t2_min": 160.0, "t2_max": 800.0,
    },
    "scan": {
        "t2_min": 160.0, "t2_max": 800.0, "n_points": 321,
        "aft_map": True, "aft_k_max": 0.45, "aft_n_k": 200,
    },
    "trajectory": {},           # TrajectoryParams overrides
    "sequence": {},             # SequenceConfig overrides
    "field": {},                # FieldConfig overrides
    "wigner": {
        "packet_a": {"center": -2.5, "momentum": 1.0, "width": 1.5,
                     "quad_phase": 0.0, "global_phase": 0.0},
        "packet_b": {"center": 2.5, "momentum": -1.0, "width": 1.5,
                     "quad_phase": 0.0, "global_phase": 0.4},
        "omega": 2 * math.pi * 113e-6, "tau_over_period": 0.25,
        "n_grid": 256, "export_grid": True,
    },
    "pipeline": {
        "t2_min": 160.0, "t2_max": 800.0, "n_points": 60,
        "noise": 0.0, "blur_sigma_px": 0.0, "n_rows": 64,
    },
    "jumps": {
        "orders": [1, 2, 3, 4, 5, 6], "n_p_min": 2.0, "n_p_max": 20.0,
        "n_points": 200,
    },
    "universal": {
        "n_p": 5.61, "delta_theta": 0.0,
        "dphi_min": 0.5, "dphi_max": 12 * math.pi, "n_points": 800,
    },
}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(cfg: dict, dotted: str, value):
    node = cfg
    parts = dotted.split(".")
    for key in parts[:-1]:
        nxt = node.get(key)
        if not isinstance(nxt, dict):
            raise ConfigError(f"unknown config section in override: {dotted}")
        node = nxt
    node[parts[-1]] = value


def load_config(path, overrides):
    cfg = copy.deepcopy(_DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        if user.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {user.get('schema')}")
        for key, val in user.items():
            if key == "schema":
                continue
            if key not in cfg:
                raise ConfigError(f"unknown config section: {key}")
            if isinstance(val, dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, raw = item.partition("=")
        _apply_override(cfg, key.strip(), _parse_value(raw.strip()))
    return cfg


def _section_dataclass(cls, section: dict, name: str):
    allowed = {f.name for f in fields(cls)}
    bad = set(section) - allowed
    if bad:
        raise ConfigError(f"unknown {name} fields: {sorted(bad)}")
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name} config: {exc}")


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    seed: int
    out_dir: str
    version: str
    timestamp: str

    def write(self, out_dir):
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.12g}" if isinstance(x, float) else str(x)
                              for x in row) + "\n")


def _write_json(path, doc):
    with open(path, "w") as fh:
        if isinstance(doc, str):
            fh.write(doc)
            if not doc.endswith("\n"):
                fh.write("\n")
        else:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- command wiring --------------------------------------------------------

def run_command(name, config, out, seed, jobs, set_, body):
    """Shared scaffolding: config load, out dir, manifest, exit codes."""
    try:
        cfg = load_config(config, set_)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    os.makedirs(out, exist_ok=True)
    try:
        body(cfg, out, seed, jobs)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except (FitError, FloatingPointError, np.linalg.LinAlgError,
            ArithmeticError, RuntimeError, ValueError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    RunManifest(command=name, config_path=config, seed=seed, out_dir=out,
                version=__version__, timestamp=stamp).write(out)


def _common_options(fn):
    fn = click.option("--config", type=click.Path(), default=None,
                      help="JSON config file.")(fn)
    fn = click.option("--out", type=click.Path(), default="out",
                      show_default=True, help="Output directory.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--jobs", type=int, default=0,
                      help="Parallel workers (0 = all cores).")(fn)
    fn = click.option("--set", "set_", multiple=True, metavar="KEY=VALUE",
                      help="Override a config field by dotted path.")(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """1D anomalous-moire toolkit."""


def _pattern_params(section) -> ModelParams:
    try:
        kappa = float(section["kappa"])
        dphi = float(section["delta_phi"])
        n_p = float(section["n_p"])
        sigma = math.pi * n_p / (2 * kappa)
        return ModelParams.symmetric(kappa, dphi, sigma,
                                     theta=float(section["theta"]),
                                     z_center=float(section["z_center"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid pattern config: {exc}")


@main.command()
@_common_options
def generate(config, out, seed, jobs, set_):
    """Render one two-constituent pattern and its spectrum."""
    def body(cfg, out, seed, jobs):
        sec = cfg["pattern"]
        params = _pattern_params(sec)
        n = int(sec["n_points"])
        signal = generate_pattern(params, grid=(*default_grid(params, n=n), n))
        spec = numerical_spectrum(signal, params.sigma)
        signal.to_csv(os.path.join(out, "pattern.csv"))
        spec.to_csv(os.path.join(out, "spectrum.csv"))
        _write_json(os.path.join(out, "params.json"), params.to_json())
        report.plot_pattern(signal, os.path.join(out, "pattern.png"), spec)
    run_command("generate", config, out, seed, jobs, set_, body)


@main.command()
@_common_options
def surface(config, out, seed, jobs, set_):
    """Map the moire wavenumber over the (kappa, delta-phi) plane."""
    def body(cfg, out, seed, jobs):
        sec = cfg["surface"]
        kappa = np.linspace(sec["kappa_min"], sec["kappa_max"],
                            int(sec["n_kappa"]))
        dphi = np.linspace(sec["dphi_min"], sec["dphi_max"],
                           int(sec["n_dphi"]))
        n_jobs = jobs if jobs > 0 else (os.cpu_count() or 1)
        surf = km_surface(kappa, dphi, float(sec["n_p"]), jobs=n_jobs)
        surf.to_csv(os.path.join(out, "surface.csv"))
        traj = None
        if sec["overlay_trajectory"]:
            fit = _section_dataclass(TrajectoryParams, cfg["trajectory"],
                                     "trajectory")
            t2 = np.linspace(sec["t2_min"], sec["t2_max"], 200)
            traj = experimental_trajectory(t2, fit)
            traj.to_csv(os.path.join(out, "trajectory.csv"))
        report.plot_surface(surf, os.path.join(out, "surface.png"), traj)
    run_command("surface", config, out, seed, jobs, set_, body)


@main.command("scan-t2")
@_common_options
def scan_t2(config, out, seed, jobs, set_):
    """Staircase scan of the moire wavenumber along the T2 trajectory."""
    def body(cfg, out, seed, jobs):
        sec = cfg["scan"]
        fit = _section_dataclass(TrajectoryParams, cfg["trajectory"],
                                 "trajectory")
        t2 = np.linspace(sec["t2_min"], sec["t2_max"], int(sec["n_points"]))
        traj = experimental_trajectory(t2, fit)
        vis = visibility_model(t2, fit)
        sigma = traj.sigma()
        rows = []
        for i in range(t2.size):
            p = ModelParams.symmetric(traj.kappa[i], traj.dphi[i], sigma[i])
            try:
                sol = solve_km(p)
                km = sol.k_m
                sk = sol.secondary_k if sol.secondary_k is not None else math.nan
                failed = 0
            except (RuntimeError, ValueError):
                km, sk, failed = math.nan, math.nan, 1
            rows.append((float(t2[i]), float(traj.kappa[i]),
                         float(traj.dphi[i]), km, sk, float(vis[i]), failed))
        _write_csv(os.path.join(out, "scan.csv"),
                   "T2_us,kappa_rad_per_um,dphi_rad,K_M_rad_per_um,"
                   "K_secondary_rad_per_um,visibility_model,failed", rows)
        if sec["aft_map"]:
            kk = np.linspace(0.0, float(sec["aft_k_max"]), int(sec["aft_n_k"]))
            with open(os.path.join(out, "aft_map.csv"), "w") as fh:
                fh.write("T2_us,K_rad_per_um,aft\n")
                for i in range(t2.size):
                    p = ModelParams.symmetric(traj.kappa[i], traj.dphi[i],
                                              sigma[i])
                    vals = analytic_aft(p, kk)
                    for k, a in zip(kk, vals):
                        fh.write(f"{t2[i]:.12g},{k:.12g},{a:.12g}\n")
        km_arr = np.array([r[3] for r in rows])
        report.plot_scan(t2, km_arr, vis, os.path.join(out, "scan.png"),
                         kappa=traj.kappa)
    run_command("scan-t2", config, out, seed, jobs, set_, body)


@main.command()
@_common_options
def simulate(config, out, seed, jobs, set_):
    """Run the full interferometer sequence and report conservation."""
    def body(cfg, out, seed, jobs):
        fieldcfg = _section_dataclass(FieldConfig, cfg["field"], "field")
        sec = dict(cfg["sequence"])
        sec["field"] = fieldcfg
        seq = _section_dataclass(SequenceConfig, sec, "sequence")
        result = run_sequence(seq)
        rows = [(r.time, r.label, r.spin, r.gamma, r.chi, r.kappa,
                 r.sigma, r.delta_z, r.n_periods) for r in result.records]
        _write_csv(os.path.join(out, "conservation.csv"),
                   "t_us,label,spin,gamma,chi_rad,kappa_rad_per_um,"
                   "sigma_um,delta_z_um,n_periods", rows)
        moire = result.moire_pattern()
        moire.to_csv(os.path.join(out, "moire.csv"))
        result.pattern(1, grid=moire.z).to_csv(os.path.join(out, "spin1.csv"))
        result.pattern(2, grid=moire.z).to_csv(os.path.join(out, "spin2.csv"))
        _write_json(os.path.join(out, "params.json"), result.params.to_json())
        gam = {}
        for r in result.records:
            gam.setdefault(r.spin, []).append(r.gamma)
        drift = {f"spin{s}": (max(v) - min(v)) / max(v)
                 for s, v in gam.items() if v}
        summary = {
            "n_periods": result.params.n_periods,
            "gamma_relative_drift": drift,
            "discarded_weight": result.discarded_weight,
            "observation_time_us": result.observation_time,
        }
        _write_json(os.path.join(out, "summary.json"), summary)
        report.plot_sequence(result, os.path.join(out, "sequence.png"))
    run_command("simulate", config, out, seed, jobs, set_, body)


@main.command()
@_common_options
def wigner(config, out, seed, jobs, set_):
    """Verify harmonic evolution against phase-space rotation."""
    def body(cfg, out, seed, jobs):
        sec = cfg["wigner"]
        try:
            pa = GaussianWavepacket(**sec["packet_a"])
            pb = GaussianWavepacket(**sec["packet_b"])
            omega = float(sec["omega"])
            tau = float(sec["tau_over_period"]) * 2 * math.pi / omega
            n = int(sec["n_grid"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid wigner config: {exc}")
        rep = verify_rotation_theorem(pa, pb, omega, tau, n=n)
        rep["omega_rad_per_us"] = omega
        rep["tau_us"] = tau
        _write_json(os.path.join(out, "report.json"), rep)
        if sec["export_grid"]:
            w0 = wigner_of_superposition(pa, pb, n=n)
            w0.to_binary(os.path.join(out, "wigner.f64"))
            report.plot_wigner(w0, os.path.join(out, "wigner.png"))
    run_command("wigner", config, out, seed, jobs, set_, body)


@main.command()
@_common_options
def pipeline(config, out, seed, jobs, set_):
    """Synthetic-image analysis round trip along the T2 trajectory."""
    def body(cfg, out, seed, jobs):
        sec = cfg["pipeline"]
        fit = _section_dataclass(TrajectoryParams, cfg["trajectory"],
                                 "trajectory")
        t2 = np.linspace(sec["t2_min"], sec["t2_max"], int(sec["n_points"]))
        scan = run_t2_scan(t2, fit, noise=float(sec["noise"]),
                           blur_sigma_px=float(sec["blur_sigma_px"]),
                           n_rows=int(sec["n_rows"]), seed=seed)
        rows = []
        for ti, r in zip(t2, scan["results"]):
            rows.append((float(ti), r.kappa1, r.kappa2, r.k_m, r.visibility,
                         r.phase,
                         r.secondary_k if r.secondary_k is not None else math.nan))
        _write_csv(os.path.join(out, "scan_results.csv"),
                   "T2_us,kappa1_rad_per_um,kappa2_rad_per_um,K_M_rad_per_um,"
                   "visibility,phase_rad,K_secondary_rad_per_um", rows)
        _write_json(os.path.join(out, "fits.json"), scan_to_json(scan))
        report.plot_pipeline(scan, os.path.join(out, "pipeline.png"))
    run_command("pipeline", config, out, seed, jobs, set_, body)


@main.command("jump-heights")
@_common_options
def jump_heights(config, out, seed, jobs, set_):
    """Jump height vs period number for several singularity orders."""
    def body(cfg, out, seed, jobs):
        sec = cfg["jumps"]
        n_p = np.linspace(float(sec["n_p_min"]), float(sec["n_p_max"]),
                          int(sec["n_points"]))
        orders = [int(n) for n in sec["orders"]]
        curves = jump_vs_periods(orders, n_p)
        with open(os.path.join(out, "jump_heights.csv"), "w") as fh:
            fh.write("n_p,order,jump_over_kappa\n")
            for n in orders:
                for np_i, h in zip(n_p, curves[n]):
                    fh.write(f"{np_i:.12g},{n},{h:.12g}\n")
        report.plot_jump_heights(n_p, curves,
                                 os.path.join(out, "jump_heights.png"))
    run_command("jump-heights", config, out, seed, jobs, set_, body)


@main.command()
@_common_options
def universal(config, out, seed, jobs, set_):
    """Universal staircase K_M dz vs delta-phi at fixed period number."""
    def body(cfg, out, seed, jobs):
        sec = cfg["universal"]
        n_p = float(sec["n_p"])
        dtheta = float(sec["delta_theta"])
        dphi = np.linspace(float(sec["dphi_min"]), float(sec["dphi_max"]),
                           int(sec["n_points"]))
        km_dz = np.empty_like(dphi)
        for i, dp in enumerate(dphi):
            try:
                km_dz[i] = solve_km_fixed_dz(n_p, dp, dtheta)
            except (RuntimeError, ValueError):
                km_dz[i] = math.nan
        if np.all(np.isnan(km_dz)):
            raise RuntimeError("no stationary point found at any delta-phi")
        _write_csv(os.path.join(out, "universal.csv"),
                   "dphi_rad,K_M_dz_rad",
                   [(float(a), float(b)) for a, b in zip(dphi, km_dz)])
        report.plot_universal(dphi, km_dz, os.path.join(out, "universal.png"))
    run_command("universal", config, out, seed, jobs, set_, body)


if __name__ == "__main__":
    main()
