"""Command-line front end.

Subcommands: ``spectrum`` (equivalent-input noise tables), ``optimize``
(numeric optima with closed-form comparisons), ``stability`` (working-
point stability grid) and ``figure`` (named benchmark datasets fig2,
fig3, fig4). Outputs are bit-stable: no timestamps, floats written with
full round-trip precision, files written atomically.

Exit codes: 0 success, 2 configuration error, 3 numerical singularity,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import finite_bandwidth as fb
from . import optimize as opt
from . import quasistatic as qs
from .config import RunConfig, load_run_config
from .core import OpticalCavity, WorkingPoint, mech_susceptibility, stability
from .errors import (
    ConfigError,
    ConvergenceError,
    NoMeasurementError,
    SingularPointError,
)

SCHEMA_VERSION = "v1"

FIGURE_DETUNINGS = {
    "fig2": (0.0, -2.0, -5.0, -10.0),
    "fig3": (0.0, 2.0, 5.0, 10.0),
    "fig4": (0.0, 2.0, 5.0, 10.0, -10.0, -10.0),
}
FIGURE_BANDWIDTHS = {"fig4": (2.0, 2.0, 2.0, 2.0, 2.0, 1.0 / 3.0)}
FIGURE_GRIDS = {"fig2": (1e-2, 1e2, 200), "fig3": (1e-1, 1e1, 400), "fig4": (1e-2, 1e3, 400)}
CURVE_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _cell(value) -> str:
    """One CSV cell with full round-trip precision."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".optospring-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(
    path: str,
    kind: str,
    out_format: str,
    param_lines: list[str],
    columns: list[str],
    blocks: list[tuple[str, list]],
) -> None:
    """Emit a dataset as CSV (comment header + rows) or its JSON mirror."""
    if out_format == "csv":
        lines = [f"# optospring {kind} {SCHEMA_VERSION}"]
        lines += [f"# {p}" for p in param_lines]
        lines.append(",".join(columns))
        for label, rows in blocks:
            if label:
                lines.append(f"# {label}")
            for row in rows:
                lines.append(",".join(_cell(v) for v in row))
        _atomic_write(path, "\n".join(lines) + "\n")
    else:
        doc = {
            "schema": f"optospring.{kind}.{SCHEMA_VERSION}",
            "params": param_lines,
            "columns": columns,
            "blocks": [
                {
                    "label": label,
                    "rows": [
                        [bool(v) if isinstance(v, (bool, np.bool_)) else float(v) for v in row]
                        for row in rows
                    ],
                }
                for label, rows in blocks
            ],
        }
        _atomic_write(path, json.dumps(doc, sort_keys=True) + "\n")


def read_table(path: str):
    """Re-parse an emitted CSV dataset: (params, columns, rows)."""
    params, columns, rows = [], None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                params.append(line[1:].strip())
                continue
            if not line:
                continue
            if columns is None:
                columns = line.split(",")
            else:
                rows.append([float(x) for x in line.split(",")])
    return params, columns, rows


def _write_json(path: str, doc: dict) -> None:
    _atomic_write(path, json.dumps(doc, sort_keys=True) + "\n")


def _out_path(cfg: RunConfig, default_stem: str, override: str | None) -> str:
    if override:
        return override
    if cfg.out_path:
        return cfg.out_path
    return f"{default_stem}.{cfg.out_format}"


def cmd_spectrum(cfg: RunConfig, out_override: str | None = None) -> int:
    """Equivalent-input noise tables, one block per working point."""
    blocks = []
    for wp in cfg.points:
        if wp.coupling <= 0:
            raise ConfigError("spectrum requires coupling > 0 for every working point")
        omega_sql = qs.sql_frequency(cfg.oscillator, wp.coupling, cfg.constants)
        scale = omega_sql if cfg.grid_units == "omega_sql" else 1.0
        grid = fb.log_grid(
            cfg.grid_lo * scale, cfg.grid_hi * scale, cfg.grid_points_per_decade
        )
        if cfg.model == "finite":
            sp = fb.spectrum(cfg.oscillator, cfg.cavity, wp, grid, constants=cfg.constants)
            s_sig, s_sql = sp.s_sig, sp.s_sql
        else:
            try:
                s_sig = qs.equivalent_input_noise(
                    cfg.oscillator, cfg.cavity, wp, grid, constants=cfg.constants
                )
            except NoMeasurementError as exc:  # pragma: no cover - guarded above
                raise ConfigError(str(exc)) from None
            s_sql = cfg.constants.hbar * np.abs(mech_susceptibility(cfg.oscillator, grid))
        label = (
            f"point detuning={wp.detuning!r} coupling={wp.coupling!r} "
            f"omega_sql={omega_sql!r}"
        )
        rows = [
            (om / scale, s, q, s / q)
            for om, s, q in zip(grid, np.atleast_1d(s_sig), np.atleast_1d(s_sql))
        ]
        blocks.append((label, rows))
    path = _out_path(cfg, "spectrum", out_override)
    write_table(
        path,
        "spectrum",
        cfg.out_format,
        cfg.param_lines(),
        ["omega_norm", "s_sig", "s_sql", "ratio"],
        blocks,
    )
    print(path)
    return 0


def _stability_dict(cfg: RunConfig, wp: WorkingPoint) -> dict:
    rep = stability(cfg.oscillator, cfg.cavity, wp, cfg.constants)
    return {
        "static_ok": rep.static_ok,
        "dynamic_ok": rep.dynamic_ok,
        "gamma_eff": rep.gamma_eff,
        "static_margin": rep.static_margin,
        "dynamic_margin": rep.dynamic_margin,
    }


def cmd_optimize(cfg: RunConfig, out_override: str | None = None) -> int:
    """Numeric optimum report (JSON), with closed-form comparison."""
    gamma = cfg.cavity.gamma
    spec = opt.SearchSpec()
    report: dict = {"mode": cfg.optimize_mode, "units": cfg.units}
    if cfg.optimize_mode == "xi":
        res = opt.minimize_xi_quasistatic(
            cfg.oscillator, gamma, cfg.optimize_detuning, cfg.optimize_omega,
            spec, constants=cfg.constants,
        )
        if not res.converged:
            raise ConvergenceError("coupling search did not converge")
        closed = qs.coupling_optimum(
            cfg.oscillator, cfg.optimize_omega, cfg.optimize_detuning, gamma, cfg.constants
        )
        wp_min = WorkingPoint(cfg.optimize_detuning, math.sqrt(res.coupling2))
        report.update(
            omega=cfg.optimize_omega,
            detuning=cfg.optimize_detuning,
            coupling2=res.coupling2,
            level=res.level,
            ratio_to_sql=res.ratio_to_sql,
            iterations=res.iterations,
            converged=res.converged,
            constraint_active=res.constraint_active,
            closed_form={
                "coupling2": closed.coupling**2,
                "level": closed.level,
                "ratio_to_sql": closed.ratio_to_sql,
            },
            stability=_stability_dict(cfg, wp_min),
        )
    elif cfg.optimize_mode == "detuning":
        res = opt.minimize_over_detuning(
            cfg.oscillator, gamma, cfg.optimize_omega, spec, cfg.constants
        )
        if not res.converged:
            raise ConvergenceError("detuning search did not converge")
        closed = qs.ultimate_quantum_limit(
            cfg.oscillator, cfg.optimize_omega, gamma, cfg.constants
        )
        wp_min = WorkingPoint(res.detuning, math.sqrt(res.coupling2))
        report.update(
            omega=cfg.optimize_omega,
            detuning=res.detuning,
            coupling2=res.coupling2,
            level=res.level,
            ratio_to_sql=res.ratio_to_sql,
            iterations=res.iterations,
            converged=res.converged,
            constraint_active=res.constraint_active,
            closed_form={
                "detuning": closed.detuning,
                "coupling2": closed.coupling**2,
                "level": closed.level,
                "ratio_to_sql": closed.ratio_to_sql,
            },
            stability=_stability_dict(cfg, wp_min),
        )
    else:  # uql-sweep
        rows = []
        for omega in cfg.optimize_omegas:
            res = opt.minimize_over_detuning(cfg.oscillator, gamma, omega, spec, cfg.constants)
            if not res.converged:
                raise ConvergenceError(f"detuning search did not converge at omega={omega!r}")
            chi = mech_susceptibility(cfg.oscillator, omega)
            rows.append(
                {
                    "omega": omega,
                    "level": res.level,
                    "uql_level": cfg.constants.hbar * abs(chi.imag),
                    "detuning": res.detuning,
                    "coupling2": res.coupling2,
                }
            )
        report["sweep"] = rows
    path = out_override or cfg.out_path or "optimize.json"
    _write_json(path, report)
    print(path)
    return 0


def cmd_stability(cfg: RunConfig, out_override: str | None = None) -> int:
    """Stability grid over (coupling^2, detuning), normalized axes."""
    hbar = cfg.constants.hbar
    chi0 = 1.0 / (cfg.oscillator.mass * cfg.oscillator.resonance_freq**2)
    xi_sql2 = 1.0 / (2.0 * hbar * chi0)
    gamma = cfg.cavity.gamma
    lo, hi, nx = cfg.stability_xi2
    if lo <= 0:
        raise ConfigError("stability.xi2 bounds must be positive")
    xi2_norm = np.geomspace(lo, hi, int(nx))
    plo, phi, npsi = cfg.stability_psi
    psi_norm = np.linspace(plo, phi, int(npsi))
    psi_abs = psi_norm * gamma
    if psi_abs.min() <= -math.pi or psi_abs.max() > math.pi:
        raise ConfigError("stability.psi window leaves the principal interval")
    grid = opt.stability_map(
        cfg.oscillator, cfg.cavity, xi2_norm * xi_sql2, psi_abs, cfg.constants
    )
    rows = []
    for a in range(psi_norm.size):
        for b in range(xi2_norm.size):
            rows.append(
                (
                    xi2_norm[b],
                    psi_norm[a],
                    int(grid.static_ok[a, b]),
                    int(grid.dynamic_ok[a, b]),
                    grid.static_margin[a, b],
                    grid.dynamic_margin[a, b],
                )
            )
    path = _out_path(cfg, "stability", out_override)
    write_table(
        path,
        "stability",
        cfg.out_format,
        cfg.param_lines()
        + [f"xi2_norm unit = {xi_sql2!r}", f"psi_norm unit = {gamma!r}"],
        ["xi2_norm", "psi_norm", "static_ok", "dynamic_ok", "static_margin", "dynamic_margin"],
        [("", rows)],
    )
    print(path)
    return 0


def _figure_grid(figure: str, grid_flag: str | None):
    if grid_flag is not None:
        parts = grid_flag.split(":")
        if len(parts) != 3:
            raise ConfigError(f"--grid expects lo:hi:points-per-decade, got {grid_flag!r}")
        try:
            lo, hi, ppd = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"--grid: {exc}") from None
    else:
        lo, hi, ppd = FIGURE_GRIDS[figure]
    return fb.log_grid(lo, hi, ppd)


def cmd_figure(
    cfg: RunConfig,
    figure: str,
    detunings: tuple[float, ...] | None,
    bandwidths: tuple[float, ...] | None,
    out_dir: str,
    grid_flag: str | None,
) -> int:
    """Emit one dataset file per curve of a named figure, plus a manifest."""
    if figure not in FIGURE_DETUNINGS:
        raise ConfigError(f"unknown figure id {figure!r} (expected fig2, fig3 or fig4)")
    if cfg.units != "normalized":
        raise ConfigError("figure datasets are defined in normalized units")
    gamma = cfg.cavity.gamma
    ratios = tuple(detunings) if detunings else FIGURE_DETUNINGS[figure]
    if figure == "fig4":
        bws = tuple(bandwidths) if bandwidths else None
        if bws is None:
            bws = (
                FIGURE_BANDWIDTHS["fig4"]
                if ratios == FIGURE_DETUNINGS["fig4"]
                else (2.0,) * len(ratios)
            )
        if len(bws) != len(ratios):
            raise ConfigError("--bandwidths must match --detunings in length")
    elif bandwidths:
        raise ConfigError("--bandwidths only applies to fig4")

    grid = _figure_grid(figure, grid_flag)
    manifest: dict = {
        "schema": f"optospring.figure.{SCHEMA_VERSION}",
        "figure": figure,
        "units": "normalized",
        "format": cfg.out_format,
        "curves": {},
    }
    os.makedirs(out_dir, exist_ok=True)

    if figure == "fig2":
        osc = cfg.oscillator
        chi0 = 1.0 / (osc.mass * osc.resonance_freq**2)
        xi_sql2 = 1.0 / (2.0 * cfg.constants.hbar * chi0)
        s_sql = cfg.constants.hbar * chi0
        columns = ["xi2_norm", "s_sig", "s_sql", "ratio", "static_ok", "dynamic_ok"]
        manifest["normalization"] = {
            "x": "coupling^2 over the zero-frequency SQL coupling^2",
            "xi_sql2": xi_sql2,
            "s_sql": s_sql,
            "frequency": 0.0,
        }
        manifest["parameters"] = {
            "gamma": gamma,
            "oscillator": {
                "mass": osc.mass,
                "resonance_freq": osc.resonance_freq,
                "damping": osc.damping,
            },
            "note": "s_sig is inf exactly on the static stability boundary",
        }
        for idx, r in enumerate(ratios):
            rows = []
            for x in grid:
                wp = WorkingPoint(detuning=r * gamma, coupling=math.sqrt(x * xi_sql2))
                try:
                    s = qs.equivalent_input_noise(
                        osc, cfg.cavity, wp, 0.0, constants=cfg.constants
                    )
                except SingularPointError:
                    s = math.inf
                rep = stability(osc, cfg.cavity, wp, cfg.constants)
                rows.append((x, s, s_sql, s / s_sql, rep.static_ok, rep.dynamic_ok))
            _emit_curve(cfg, manifest, out_dir, figure, idx, r, None, columns, rows)
    else:
        omega_sql = 1.0
        xi = math.sqrt(0.5 / cfg.constants.hbar)  # makes omega_sql exactly 1
        osc = fb.quasi_free_oscillator(omega_sql)
        s_ref = cfg.constants.hbar / (osc.mass * omega_sql**2)
        columns = ["omega_norm", "s_sig", "s_sql", "ratio"]
        manifest["normalization"] = {
            "x": "frequency over the balance frequency omega_sql",
            "omega_sql": omega_sql,
            "s_ref": s_ref,
            "coupling2": xi**2,
        }
        manifest["parameters"] = {
            "gamma": gamma,
            "oscillator": {
                "mass": osc.mass,
                "resonance_freq": osc.resonance_freq,
                "damping": osc.damping,
            },
        }
        for idx, r in enumerate(ratios):
            wp = WorkingPoint(detuning=r * gamma, coupling=xi)
            if figure == "fig3":
                s_sig = qs.equivalent_input_noise(
                    osc, cfg.cavity, wp, grid, constants=cfg.constants
                )
                s_sql = cfg.constants.hbar * np.abs(mech_susceptibility(osc, grid))
                bandwidth = None
            else:
                bandwidth = bws[idx]
                cavity = OpticalCavity(
                    gamma=gamma,
                    round_trip=gamma / (bandwidth * omega_sql),
                    wavevector=cfg.cavity.wavevector,
                )
                sp = fb.spectrum(osc, cavity, wp, grid, constants=cfg.constants)
                s_sig, s_sql = sp.s_sig, sp.s_sql
            rows = [
                (om, s, q, s / q)
                for om, s, q in zip(grid, np.atleast_1d(s_sig), np.atleast_1d(s_sql))
            ]
            _emit_curve(cfg, manifest, out_dir, figure, idx, r, bandwidth, columns, rows)

    manifest_path = os.path.join(out_dir, f"{figure}_manifest.json")
    _write_json(manifest_path, manifest)
    print(manifest_path)
    return 0


def _emit_curve(cfg, manifest, out_dir, figure, idx, detuning_ratio, bandwidth, columns, rows):
    letter = CURVE_LETTERS[idx]
    name = f"{figure}_curve_{letter}.{cfg.out_format}"
    path = os.path.join(out_dir, name)
    label = f"curve {letter}: detuning_over_gamma={detuning_ratio!r}"
    if bandwidth is not None:
        label += f" bandwidth_over_omega_sql={bandwidth!r}"
    write_table(path, f"{figure}-curve", cfg.out_format, [label], columns, [("", rows)])
    entry = {"file": name, "detuning_over_gamma": detuning_ratio}
    if bandwidth is not None:
        entry["bandwidth_over_omega_sql"] = bandwidth
    manifest["curves"][letter] = entry


def _parse_ratio(text: str) -> float:
    """A float, allowing a simple fraction like 1/3."""
    text = text.strip()
    try:
        if "/" in text:
            num, _, den = text.partition("/")
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad ratio {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file")
    common.add_argument("--out", metavar="PATH", help="output path (or directory for figure)")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    common.add_argument("--grid", metavar="LO:HI:PPD", help="log grid spec")
    units = common.add_mutually_exclusive_group()
    units.add_argument("--normalized", action="store_true", help="normalized units (hbar = 1)")
    units.add_argument("--si", action="store_true", help="SI units")

    parser = argparse.ArgumentParser(
        prog="optospring",
        description="Quantum-noise-limited sensitivity of a detuned cavity "
        "with a movable mirror",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="equivalent-input noise tables")
    p_opt = sub.add_parser("optimize", parents=[common], help="numeric optimum report")
    p_opt.add_argument("--mode", choices=["xi", "detuning", "uql-sweep"])
    p_opt.add_argument("--omega", type=float, help="evaluation frequency (rad/s)")
    p_opt.add_argument("--detuning", type=float, help="fixed detuning for xi mode (rad)")
    sub.add_parser("stability", parents=[common], help="stability grid")
    p_fig = sub.add_parser("figure", parents=[common], help="benchmark figure datasets")
    p_fig.add_argument("figure_id", help="fig2, fig3 or fig4")
    p_fig.add_argument("--detunings", help="comma list of detuning/gamma ratios")
    p_fig.add_argument("--bandwidths", help="comma list of bandwidth/omega_sql ratios (fig4)")
    return parser


def _config_overrides(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if args.format:
        overrides["output.format"] = args.format
    if args.out and args.command != "figure":
        overrides["output.path"] = args.out
    if getattr(args, "normalized", False):
        overrides["units"] = "normalized"
    if getattr(args, "si", False):
        overrides["units"] = "si"
    if args.grid and args.command != "figure":
        parts = args.grid.split(":")
        if len(parts) != 3:
            raise ConfigError(f"--grid expects lo:hi:points-per-decade, got {args.grid!r}")
        overrides["grid.lo"], overrides["grid.hi"] = parts[0], parts[1]
        overrides["grid.points_per_decade"] = parts[2]
    if args.command == "optimize":
        if args.mode:
            overrides["optimize.mode"] = args.mode
        if args.omega is not None:
            overrides["optimize.omega"] = repr(args.omega)
        if args.detuning is not None:
            overrides["optimize.detuning"] = repr(args.detuning)
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config, _config_overrides(args))
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.out)
        if args.command == "optimize":
            return cmd_optimize(cfg, args.out)
        if args.command == "stability":
            return cmd_stability(cfg, args.out)
        detunings = None
        if args.detunings:
            detunings = tuple(_parse_ratio(x) for x in args.detunings.split(","))
        bandwidths = None
        if args.bandwidths:
            bandwidths = tuple(_parse_ratio(x) for x in args.bandwidths.split(","))
        return cmd_figure(
            cfg, args.figure_id, detunings, bandwidths, args.out or "figures", args.grid
        )
    except ConfigError as exc:
        print(f"optospring: config error: {exc}", file=sys.stderr)
        return 2
    except SingularPointError as exc:
        print(f"optospring: singular point: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"optospring: non-convergence: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
