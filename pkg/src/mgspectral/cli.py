"""Configuration-driven command line entry point.

Subcommands:

    symbols    dump multiplier tables, probe fits, line/cone constants
    line-run   integrate line-supported data (exact or embedded IF-RK4)
    full-run   integrate generic 3-D data on the full cube
    picard     run the Duhamel fixed-point iteration and report ratios
    report     re-read a run directory and print / refresh its summary

Exit codes: 0 all enabled checks pass, 2 invariant violation, 3 config or
usage error, 4 numerical blow-up.  The default output root is --out, else
$MG_SPECTRAL_OUT, else ./mgspec_runs.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import _fft, __version__, diagnostics as diag, dynamics, fields, snapshots, stepping, symbols
from .config import Config, load_config
from .errors import (
    ConfigError,
    DegenerateLineError,
    MgSpectralError,
    NoConvergenceError,
    NonFiniteError,
)
from .lattice import as_fraction, canonicalize_line
from .stepping import theoretical_times

logger = logging.getLogger("mgspectral")

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CONFIG = 3
EXIT_BLOWUP = 4

PRESET_DIR = Path(__file__).parent / "presets"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which collides with the
    # invariant-violation code; remap to the config-error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def preset_names():
    return sorted(p.stem for p in PRESET_DIR.glob("*.cfg"))


def resolve_config(args) -> tuple[Config, str]:
    presets = getattr(args, "preset", None) or []
    if args.config and presets:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        return load_config(args.config), Path(args.config).stem
    if len(presets) != 1:
        raise ConfigError("exactly one config or preset is required here")
    name = presets[0]
    path = PRESET_DIR / f"{name}.cfg"
    if not path.exists():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return load_config(path), name


def resolve_outdir(args, run_name: str) -> Path:
    if args.out:
        root = Path(args.out)
    elif os.environ.get("MG_SPECTRAL_OUT"):
        root = Path(os.environ["MG_SPECTRAL_OUT"])
    else:
        root = Path("mgspec_runs")
    out = root / run_name
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- run assembly -------------------------------------------------------------

def build_params(cfg: Config) -> dynamics.ModelParams:
    return dynamics.ModelParams(
        eps_hyper=cfg.get_float("model.eps_hyper", 0.0),
        eps_kappa=cfg.get_float("model.eps_kappa", 0.0),
        gamma=cfg.get_float("model.gamma", 1.0),
        omega_prime=cfg.get_float("model.omega_prime", 1.0))


def build_grid(cfg: Config) -> fields.GridSpec:
    N = cfg.get_int("grid.N")
    if N is None:
        raise ConfigError("grid.N is required")
    return fields.GridSpec(N=N, pad=cfg.get_float("grid.pad", 1.5))


def analysis_constants(cfg: Config):
    return dict(
        s_orders=cfg.get_floats("analysis.sobolev_orders", (0.0, 2.51, 4.51)),
        delta=cfg.get_float("analysis.delta", 0.01),
        alpha=cfg.get_float("analysis.alpha", 0.5),
        C_s=cfg.get_float("analysis.C_s", 1.0),
        C_alpha=cfg.get_float("analysis.C_alpha", 1.0),
        C_kappa=cfg.get_float("analysis.C_kappa", 1.0))


def build_line_data(cfg: Config, seed: int):
    """LineField from the [line] section, including optional normalization.

    normalize_value may be a number or "auto:epsilon0", which targets the
    smallness parameter of the global theory computed from the line
    constants and the [analysis] constants.  Returns (LineField, info)."""
    q = cfg.get_rational_triple("line.q")
    if q is None:
        raise ConfigError("line.q is required for line data")
    line = canonicalize_line(q)
    line.require_admissible()
    if line.p[1] == 0:
        logger.warning("line p=%s has p2 = 0: M3 vanishes there, the dynamics "
                       "are undamped and the decay theory does not apply", line.p)
    n_l = cfg.get_int("line.N_L", 8)
    beta = cfg.get_float("line.beta", 2.0)
    amp = cfg.get_float("line.amplitude", 1.0)
    data = fields.random_line_data(line, n_l, beta,
                                   seed + cfg.get_int("line.seed_offset", 0), amp)
    info = {"epsilon": None, "normalized_order": None}
    order = cfg.get_float("line.normalize_order", None)
    target_raw = cfg.get_str("line.normalize_value", None)
    if order is not None and target_raw is not None:
        ana = analysis_constants(cfg)
        if target_raw.strip() == "auto:epsilon0":
            consts = symbols.line_constants(line)
            target = min((1.0 - ana["alpha"]) / (16.0 * ana["C_alpha"]),
                         math.log(math.sqrt(2.0)) / ana["C_kappa"]) \
                * (consts.m_lower / consts.m_upper)
        else:
            try:
                target = float(target_raw)
            except ValueError as exc:
                raise ConfigError(f"line.normalize_value: {target_raw!r}") from exc
        current = fields.sobolev_norm(data, order)
        if current == 0:
            raise ConfigError("cannot normalize a zero line field")
        data = fields.LineField(line=line, coeffs=data.coeffs * (target / current))
        info = {"epsilon": target, "normalized_order": order}
    return data, info


def build_field3d(cfg: Config, grid: fields.GridSpec, seed: int) -> fields.SpectralField:
    kind = cfg.get_str("field3d.kind", "random")
    amp = cfg.get_float("field3d.amplitude", 0.01)
    if kind == "random":
        return fields.random_field(grid, beta=cfg.get_float("field3d.beta", 3.0),
                                   amplitude=amp, seed=seed,
                                   kmax=cfg.get_int("field3d.kmax", None))
    if kind == "curved":
        # modes along the curved unbounded region (k1, round(sqrt k1), 1)
        k1s = cfg.get_ints("field3d.k1_list", (4, 9, 16, 25))
        f = fields.SpectralField.zeros(grid)
        for k1 in k1s:
            k = (k1, int(round(math.sqrt(k1))), 1)
            if any(abs(c) > grid.N for c in k):
                raise ConfigError(f"curved mode {k} exceeds grid N={grid.N}")
            f.set_mode_pair(k, amp)
        return f
    raise ConfigError(f"field3d.kind must be random|curved, got {kind!r}")


def check_records(traj, cfg: Config, summary: dict) -> dict:
    """Evaluate the enabled invariant checks; returns {name: result dict}."""
    checks = {}
    if not cfg.get_bool("checks.enabled", True):
        return checks
    records = traj.records

    def add(name, worst, tol, ok=None):
        checks[name] = {"passed": bool(worst <= tol) if ok is None else bool(ok),
                        "worst": float(worst), "tol": float(tol)}

    if traj.line is not None or traj.scheme == "exact_line":
        add("leakage", max(r.leakage for r in records),
            cfg.get_float("checks.leakage_tol", 1e-10))
        add("projected_mass", max(r.projected_mass for r in records),
            cfg.get_float("checks.projected_mass_tol", 1e-12))
    add("max_divergence", max(r.max_divergence for r in records),
        cfg.get_float("checks.divergence_tol", 1e-12))
    tol = cfg.get_float("checks.nonlinear_rel_tol", None)
    if tol is not None:
        add("nonlinear_rel", traj.max_step_stat("nonlinear_rel"), tol)
    tol = cfg.get_float("checks.pairing_tol", None)
    if tol is not None:
        add("pairing_rel", traj.max_step_stat("pairing_rel"), tol)
    tol = cfg.get_float("checks.energy_residual_tol", None)
    if tol is not None:
        add("energy_residual", max(r.energy_residual for r in records), tol)
    if cfg.get_bool("checks.max_principle", False):
        worst = 0.0
        for s in traj.orders:
            h0 = diag.hs_value(records[0], s)
            if h0 == 0:
                continue
            worst = max(worst, max((diag.hs_value(r, s) - h0) / h0 for r in records))
        add("max_principle", worst, 1e-12)
    tol = cfg.get_float("checks.decay_rate_tol", None)
    if tol is not None and summary.get("decay_fits"):
        worst = max(abs(fit["rate"] - (-fit["reference_rate"]))
                    for fit in summary["decay_fits"].values()
                    if fit["reference_rate"] is not None)
        add("decay_rate", worst, tol)
    if summary.get("bootstrap"):
        rep = summary["bootstrap"]
        add("bootstrap", -min(rep["h52_min_margin"], rep["hkappa_min_margin"]), 0.0,
            ok=rep["h52_bound_ok"] and rep["hkappa_bound_ok"])
    return checks


def summarize_trajectory(traj, cfg: Config, seed: int, line_info=None) -> dict:
    ana = analysis_constants(cfg)
    records = traj.records
    summary = {
        "schema_version": 1,
        "kind": cfg.get_str("run.kind"),
        "scheme": traj.scheme,
        "seed": seed,
        "grid": None if traj.grid is None else {"N": traj.grid.N, "pad": traj.grid.pad},
        "line": None,
        "model": {"eps_hyper": traj.params.eps_hyper, "eps_kappa": traj.params.eps_kappa,
                  "gamma": traj.params.gamma, "omega_prime": traj.params.omega_prime},
        "orders": list(traj.orders),
        "n_records": len(records),
        "initial_norms": {"l2": records[0].l2,
                          "hs": {f"{s:g}": diag.hs_value(records[0], s) for s in traj.orders}},
        "final_norms": {"l2": records[-1].l2,
                        "hs": {f"{s:g}": diag.hs_value(records[-1], s) for s in traj.orders}},
        "step_maxima": {
            "nonlinear_rel": traj.max_step_stat("nonlinear_rel"),
            "pairing_rel": traj.max_step_stat("pairing_rel"),
            "projected_mass_rel": traj.max_step_stat("projected_mass_rel")},
        "energy_law_residual": (diag.energy_law_residual(records)
                                if len(records) >= 2 else 0.0),
        "decay_fits": {},
        "bootstrap": None,
        "empirical_Cs": None,
        "theoretical_times": None,
        "blow_up_time": None,
    }
    m_lower = None
    if traj.line is not None:
        consts = symbols.line_constants(traj.line)
        m_lower = consts.m_lower
        summary["line"] = {"p": list(traj.line.p), "m_lower": consts.m_lower,
                           "m_upper": consts.m_upper,
                           "components": list(consts.components)}
    if len(records) >= 6 and records[-1].l2 > 0:
        for s in traj.orders:
            try:
                fit = diag.decay_fit(records, s, reference_rate=m_lower)
                summary["decay_fits"][f"{s:g}"] = {
                    "rate": fit.rate, "r_squared": fit.r_squared,
                    "reference_rate": fit.reference_rate}
            except MgSpectralError:
                pass
    if traj.line is not None and line_info and line_info.get("epsilon"):
        try:
            rep = diag.bootstrap_check(records, epsilon=line_info["epsilon"],
                                       alpha=ana["alpha"], m_star=m_lower,
                                       delta=ana["delta"])
            summary["bootstrap"] = {
                "h52_bound_ok": rep.h52_bound_ok,
                "hkappa_bound_ok": rep.hkappa_bound_ok,
                "h52_min_margin": rep.h52_min_margin,
                "hkappa_min_margin": rep.hkappa_min_margin,
                "epsilon": rep.epsilon, "kappa": rep.kappa, "s_low": rep.s_low,
                "m_star": rep.m_star, "first_violation_t": rep.first_violation_t}
        except MgSpectralError as exc:
            summary["bootstrap"] = {"error": str(exc)}
    if traj.line is not None and len(records) >= 3:
        s_main = max(traj.orders)
        consts = symbols.line_constants(traj.line)
        try:
            c_emp, t_at = diag.empirical_Cs(records, s_main, consts.m_lower,
                                            consts.m_upper, delta=ana["delta"])
            summary["empirical_Cs"] = {"s": s_main, "value": c_emp, "t": t_at}
        except MgSpectralError:
            pass
    return summary


def write_outputs(outdir: Path, traj, cfg: Config, summary: dict, run_name: str,
                  seed: int, t0: float):
    diag.write_diagnostics_csv(traj.records, traj.orders, outdir / "diagnostics.csv")
    cfg.write(outdir / "config.cfg")
    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    mode = cfg.get_str("outputs.snapshots", "ends")
    snap_dir = outdir / "snapshots"
    if mode != "none" and traj.snapshots:
        snap_dir.mkdir(exist_ok=True)
        for t, f in (traj.snapshots[:1] + traj.snapshots[-1:] if mode == "ends"
                     else traj.snapshots):
            if isinstance(f, fields.LineField):
                grid = traj.grid or fields.GridSpec(
                    N=max(2, f.N_L * max(abs(c) for c in f.line.p)))
                f = fields.embed_line(f, grid)
            meta = {"time": t, "grid": {"N": f.grid.N, "pad": f.grid.pad},
                    "line": None if traj.line is None else list(traj.line.p),
                    "model": summary["model"], "norm_convention": "coefficient"}
            snapshots.write_mgsf(f, snap_dir / f"t{t:012.6f}.mgsf", meta)

    slices = cfg.get_ints("outputs.symbol_slices", ())
    if slices and traj.grid is not None:
        table = symbols.build_symbol_table(traj.grid.N)
        table.write_csv(outdir / "symbols.csv", k3_slices=slices)

    manifest = {
        "config_hash": cfg.hash(),
        "code_version": __version__,
        "seed": seed,
        "run_name": run_name,
        "fft_backend": _fft.backend_name(),
        "outputs": {"diagnostics": "diagnostics.csv", "summary": "summary.json"},
        "wall_clock": {"started_unix": t0, "elapsed_s": time.time() - t0},
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def exit_code_for(checks: dict) -> int:
    if checks and not all(c["passed"] for c in checks.values()):
        return EXIT_CHECK_FAILED
    return EXIT_OK


# -- subcommands ---------------------------------------------------------------

def cmd_run(args, kind: str) -> int:
    t0 = time.time()
    cfg, run_name = resolve_config(args)
    expected = cfg.get_str("run.kind", kind)
    if expected != kind:
        raise ConfigError(f"config is for run.kind={expected}, invoked as {kind}")
    seed = args.seed if args.seed is not None else cfg.get_int("run.seed", 0)
    outdir = resolve_outdir(args, run_name)
    params = build_params(cfg)
    ana = analysis_constants(cfg)
    orders = ana["s_orders"]
    dt = cfg.get_float("time.dt", 0.01)
    t_end = cfg.get_float("time.t_end", 1.0)
    every = cfg.get_int("time.record_every", 1)

    line_info = None
    theta_line = None
    line = None
    if kind == "line" or cfg.get_str("line.q") is not None:
        theta_line, line_info = build_line_data(cfg, seed)
        line = theta_line.line

    try:
        if kind == "line" and cfg.get_str("run.scheme", "if_rk4") == "exact_line":
            traj = stepping.integrate_exact_line(theta_line, params, t_end, dt,
                                                 every, orders)
        else:
            grid = build_grid(cfg)
            if theta_line is not None:
                theta0 = fields.embed_line(theta_line, grid)
            else:
                theta0 = build_field3d(cfg, grid, seed)
            fields.warn_if_undamped(theta0)
            traj = stepping.integrate_if_rk4(theta0, params, t_end, dt, every,
                                             orders, line=line)
    except NonFiniteError as exc:
        summary = {"schema_version": 1, "kind": kind, "seed": seed,
                   "blow_up_time": exc.blow_up_time, "checks": {},
                   "all_checks_passed": False, "error": str(exc)}
        with open(outdir / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        cfg.write(outdir / "config.cfg")
        raise

    summary = summarize_trajectory(traj, cfg, seed, line_info)
    if kind == "full" and traj.grid is not None:
        # order-one observable of the constitutive law on generic data
        rec0 = traj.records[0]
        if rec0.l2 > 0:
            ops = dynamics.get_operators(traj.grid)
            u = ops.velocity_cubes(traj.snapshots[0][1].coeffs)
            u_l2 = math.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in u))
            summary["velocity_ratio_l2"] = u_l2 / rec0.l2
    if line is not None and line_info is not None:
        try:
            tt = theoretical_times(
                theta_line, line, eps=cfg.get_float("picard.eps", params.eps_hyper or 0.1),
                s=max(orders), alpha=ana["alpha"], C_s=ana["C_s"],
                C_alpha=ana["C_alpha"], C_kappa=ana["C_kappa"])
            summary["theoretical_times"] = {
                "T_star_eps": tt.T_star_eps, "T_local": tt.T_local,
                "T_combined": tt.T_combined, "epsilon0": tt.epsilon0,
                "m_lower": tt.m_lower, "m_upper": tt.m_upper}
        except MgSpectralError:
            pass
    checks = check_records(traj, cfg, summary)
    summary["checks"] = checks
    summary["all_checks_passed"] = all(c["passed"] for c in checks.values())
    write_outputs(outdir, traj, cfg, summary, run_name, seed, t0)
    rc = exit_code_for(checks)
    print(f"{run_name}: {len(traj.records)} records -> {outdir} "
          f"({'ok' if rc == 0 else 'CHECKS FAILED'})")
    return rc


def cmd_picard(args) -> int:
    t0 = time.time()
    cfg, run_name = resolve_config(args)
    seed = args.seed if args.seed is not None else cfg.get_int("run.seed", 0)
    outdir = resolve_outdir(args, run_name)
    grid = build_grid(cfg)
    eps = cfg.get_float("picard.eps", 0.1)
    s = cfg.get_float("picard.s", 2.51)
    ana = analysis_constants(cfg)

    if cfg.get_str("line.q") is not None:
        theta_line, _ = build_line_data(cfg, seed)
        theta0 = fields.embed_line(theta_line, grid)
        line = theta_line.line
    else:
        theta0 = build_field3d(cfg, grid, seed)
        line = None

    horizon_raw = cfg.get_str("picard.horizon", "auto")
    drift_norm = None
    if horizon_raw.strip() == "auto":
        v = dynamics.velocity(theta0)
        drift_norm = math.sqrt(sum(fields.sobolev_norm(c, s) ** 2 for c in v))
        if drift_norm == 0:
            raise ConfigError("cannot derive a horizon from zero initial data")
        horizon = eps / (2.0 * ana["C_s"] * drift_norm ** 2)
    else:
        try:
            horizon = float(horizon_raw)
        except ValueError as exc:
            raise ConfigError(f"picard.horizon: expected number or 'auto', "
                              f"got {horizon_raw!r}") from exc
    n_steps = cfg.get_int("picard.steps", 64)

    result = stepping.picard_solve(
        theta0, velocity_source=cfg.get_str("picard.drift", "frozen"),
        eps=eps, T_star=horizon, n_max=cfg.get_int("picard.n_max", 7),
        dt=horizon / n_steps, s=s, raise_on_divergence=False)

    sweep = None
    sweep_eps = cfg.get_floats("picard.eps_sweep", ())
    if sweep_eps:
        sweep = stepping.epsilon_sweep(
            theta0, sweep_eps, T=horizon, dt=horizon / n_steps,
            n_max=cfg.get_int("picard.n_max", 7), s=s,
            velocity_source=cfg.get_str("picard.drift", "frozen"))

    with open(outdir / "picard_ratios.csv", "w", newline="") as fh:
        fh.write("n,r_tilde,ratio\n")
        for i, r in enumerate(result.r_tilde):
            n = i + 1
            ratio = result.ratios[i - 1] if i >= 1 else float("nan")
            fh.write(f"{n},{r!r},{ratio!r}\n")

    verdict = "fixed_point" if result.fixed_point else (
        "no_convergence" if _diverged(result.ratios) else "contracting")
    summary = {
        "schema_version": 1, "kind": "picard", "seed": seed,
        "grid": {"N": grid.N, "pad": grid.pad},
        "line": None if line is None else list(line.p),
        "eps": eps, "s": s, "T_star": result.T_star, "dt": result.dt,
        "drift": result.mode, "drift_norm": drift_norm,
        "r_tilde": result.r_tilde, "ratios": result.ratios,
        "converged_at": result.converged_at, "verdict": verdict,
        "epsilon_sweep": sweep,
    }
    checks = {}
    ratio_max = cfg.get_float("checks.picard_ratio_max", None)
    if ratio_max is not None and cfg.get_bool("checks.enabled", True):
        worst = max(result.ratios) if result.ratios else 0.0
        checks["picard_ratio"] = {"passed": worst <= ratio_max,
                                  "worst": worst, "tol": ratio_max}
    summary["checks"] = checks
    summary["all_checks_passed"] = all(c["passed"] for c in checks.values())
    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cfg.write(outdir / "config.cfg")
    manifest = {"config_hash": cfg.hash(), "code_version": __version__, "seed": seed,
                "run_name": run_name,
                "wall_clock": {"started_unix": t0, "elapsed_s": time.time() - t0}}
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rc = exit_code_for(checks)
    ratios = ", ".join(f"{r:.3f}" for r in result.ratios)
    print(f"{run_name}: ratios [{ratios}] verdict={verdict} -> {outdir}")
    return rc


def _diverged(ratios) -> bool:
    streak = 0
    for r in ratios:
        streak = streak + 1 if r > 1.0 else 0
        if streak >= 3:
            return True
    return False


def cmd_symbols(args) -> int:
    outdir = resolve_outdir(args, "symbols")
    wrote = []
    if args.table is not None:
        table = symbols.build_symbol_table(args.table)
        slices = [int(v) for v in args.slices.split(",")] if args.slices else None
        path = outdir / "symbols_table.csv"
        table.write_csv(path, k3_slices=slices)
        wrote.append(path)
    if args.probe is not None:
        r = float(args.probe.lstrip("r="))
        lo, hi = (int(v) for v in args.k1.split(":"))
        fit = symbols.asymptotic_probe(r, symbols.k1_sweep(lo, hi))
        path = outdir / f"probe_r{r:g}.json"
        with open(path, "w") as fh:
            json.dump({"r": fit.r, "slopes": list(fit.slopes),
                       "k1_values": list(fit.k1_values)}, fh, indent=2)
            fh.write("\n")
        print(f"probe r={fit.r:g}: slopes = "
              f"({fit.slopes[0]:.4f}, {fit.slopes[1]:.4f}, {fit.slopes[2]:.4f})")
        wrote.append(path)
    if args.line is not None:
        line = canonicalize_line(tuple(as_fraction(c) for c in args.line.split(",")))
        consts = symbols.line_constants(line)
        path = outdir / f"line_{'_'.join(str(c) for c in line.p)}.json"
        with open(path, "w") as fh:
            json.dump({"p": list(line.p), "m_lower": consts.m_lower,
                       "m_upper": consts.m_upper,
                       "components": list(consts.components)}, fh, indent=2)
            fh.write("\n")
        print(f"line p={line.p}: m_lower={consts.m_lower:g} m_upper={consts.m_upper:g} "
              f"M={consts.components}")
        wrote.append(path)
    if args.cone is not None:
        bounds = symbols.cone_bounds(as_fraction(args.cone))
        path = outdir / f"cone_{args.cone}.json"
        with open(path, "w") as fh:
            json.dump({"aperture": str(args.cone), "m_lower": bounds.m_lower,
                       "m_upper": bounds.m_upper}, fh, indent=2)
            fh.write("\n")
        print(f"cone C={args.cone}: bounds = [{bounds.m_lower:g}, {bounds.m_upper:g}]")
        wrote.append(path)
    if not wrote:
        raise ConfigError("symbols: nothing to do (give --table, --probe, --line or --cone)")
    return EXIT_OK


def cmd_report(args) -> int:
    rundir = Path(args.rundir)
    summary_path = rundir / "summary.json"
    if not summary_path.exists():
        raise ConfigError(f"{rundir} does not contain summary.json")
    with open(summary_path) as fh:
        summary = json.load(fh)
    csv_path = rundir / "diagnostics.csv"
    print(f"run: {rundir.name}  kind={summary.get('kind')}  scheme={summary.get('scheme')}")
    if csv_path.exists():
        records, orders = diag.read_diagnostics_csv(csv_path)
        print(f"records: {len(records)}  t in [{records[0].t:g}, {records[-1].t:g}]")
        if len(records) >= 2:
            print(f"energy-law residual (recomputed): {diag.energy_law_residual(records):.3e}")
        for s in orders:
            try:
                fit = diag.decay_fit(records, s)
                print(f"H^{s:g} decay rate: {fit.rate:+.6f} (r^2={fit.r_squared:.6f})")
            except MgSpectralError:
                pass
    for name, c in (summary.get("checks") or {}).items():
        status = "ok" if c["passed"] else "FAILED"
        print(f"check {name}: {status} (worst={c['worst']:.3e}, tol={c['tol']:.3e})")
    if summary.get("ratios"):
        print("picard ratios:", ", ".join(f"{r:.4f}" for r in summary["ratios"]))
    return EXIT_OK if summary.get("all_checks_passed", True) else EXIT_CHECK_FAILED


def _fan_out(args, command: str) -> int:
    """Run one subprocess per preset, bounded by --jobs."""
    from concurrent.futures import ThreadPoolExecutor

    def run_one(preset):
        cmd = [sys.executable, "-m", "mgspectral", command, "--preset", preset]
        if args.out:
            cmd += ["--out", args.out]
        if args.seed is not None:
            cmd += ["--seed", str(args.seed)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        sys.stdout.write(proc.stdout)
        sys.stderr.write(proc.stderr)
        return proc.returncode

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        codes = list(pool.map(run_one, args.preset))
    return max(codes)


def build_parser() -> _Parser:
    parser = _Parser(prog="mgspec", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_args(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--preset", action="append",
                       help=f"packaged preset name ({', '.join(preset_names())}); "
                            "repeat with --jobs for a fan-out batch")
        p.add_argument("--out", help="output root (default $MG_SPECTRAL_OUT or ./mgspec_runs)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel preset jobs")

    p = sub.add_parser("symbols", help="dump symbol tables, probe fits, constants")
    p.add_argument("--table", type=int, metavar="N", help="tabulate the cube |k_i| <= N")
    p.add_argument("--slices", metavar="K3S", help="restrict the table to k3 planes, e.g. 0,1")
    p.add_argument("--probe", metavar="R", help="curved-region exponent in (0, 1/2], e.g. r=0.5")
    p.add_argument("--k1", default="64:4096", metavar="LO:HI", help="probe sweep range")
    p.add_argument("--line", metavar="Q1,Q2,Q3", help="report line constants")
    p.add_argument("--cone", metavar="C", help="report cone bounds")
    p.add_argument("--out", help="output root")
    p.add_argument("--seed", type=int, help=argparse.SUPPRESS)

    for name in ("line-run", "full-run", "picard"):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} from a config or preset")
        add_run_args(p)

    p = sub.add_parser("report", help="summarize an existing run directory")
    p.add_argument("rundir")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "symbols":
            return cmd_symbols(args)
        if args.command == "report":
            return cmd_report(args)
        if getattr(args, "preset", None) and len(args.preset) > 1:
            return _fan_out(args, args.command)
        if args.command == "line-run":
            return cmd_run(args, "line")
        if args.command == "full-run":
            return cmd_run(args, "full")
        if args.command == "picard":
            return cmd_picard(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except NonFiniteError as exc:
        logger.error("numerical blow-up: %s", exc)
        return EXIT_BLOWUP
    except (ConfigError, DegenerateLineError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except NoConvergenceError as exc:
        logger.error("picard iteration diverged: %s", exc)
        return EXIT_CHECK_FAILED
    except MgSpectralError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
