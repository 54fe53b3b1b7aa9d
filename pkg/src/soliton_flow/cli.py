"""Command line entry point.

    soliton-flow run --config PATH [--preset NAME] [--out DIR] [--workers N] [--no-plots]
    soliton-flow sweep --config PATH [--preset NAME] [--out DIR] [--workers N] [--no-plots]
    soliton-flow critical-points --model "dims=1,2;lambdas=0,1;epsilon=1" --out FILE

Exit codes: 0 ok, 2 config error, 3 model validation failure, 4 integration
event before the minimum horizon (artifacts still written), 5 internal error.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import report
from .asymptotics import (check_lambda_limits, check_scaling_laws, einstein_convergence, estimate_sigma,
                          fit_cone_slopes)
from .config import RunConfig, load, parse_model_spec
from .errors import ConfigError
from .model import validate
from .monitors import check_region_invariance, run_monitors
from .output import write_csv
from .phase import critical_points, sample_launches, write_critical_points_csv
from .runs import run_einstein, run_physical, to_physical

log = logging.getLogger("soliton_flow")

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_EVENT, EXIT_INTERNAL = 0, 2, 3, 4, 5


def _fits_safe(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ValueError as exc:
        log.warning("fit skipped: %s", exc)
        return []


def execute(cfg: RunConfig, out_dir: str, plots: bool = True) -> int:
    """Run one configuration and write its artifacts; returns the exit code."""
    os.makedirs(out_dir, exist_ok=True)
    model = cfg.model
    if cfg.mode == "physical":
        violations = validate(model, cfg.ubar)
    else:
        violations = [v for v in validate(model, -1.0) if not v.startswith("E-nonnegative")]
    if violations:
        with open(os.path.join(out_dir, cfg.out_summary), "w", newline="\n") as fh:
            fh.write("model validation failed:\n" + "".join(f"  {v}\n" for v in violations))
        for v in violations:
            log.error("validation: %s", v)
        return EXIT_VALIDATION

    fits, extra = [], []
    tail = dict(frac=cfg.tail_fraction, min_points=cfg.min_points)
    if cfg.mode == "physical":
        hbar = cfg.hbar[0] if len(cfg.hbar) == 1 else cfg.hbar
        traj = run_physical(model, hbar, cfg.ubar, cfg.integrator, cfg.order, cfg.t0)
        phase_traj = None
    else:
        if cfg.mode == "phase":
            from .integrator import integrate
            from .phase import phase_field

            x0 = sample_launches(model, 1, cfg.delta, cfg.seed)[0]
            phase_traj = integrate(phase_field(model), x0, 0.0, cfg.integrator, variable="s",
                                   meta={"space": "phase", "model": model.fingerprint()})
        else:
            phase_traj = run_einstein(model, cfg.delta, cfg.c_w, cfg.c_y, cfg.integrator)
        traj = to_physical(phase_traj, model)
        report.write_phase_csv(os.path.join(out_dir, "phase.csv"), phase_traj, model)
        extra.append(check_region_invariance(phase_traj, model))
        if cfg.mode == "phase":
            fits += _fits_safe(check_scaling_laws, phase_traj, model, t=traj.grid, **tail)
            fits += _fits_safe(check_lambda_limits, phase_traj, model, **tail)
            for i in range(1, model.r + 1):
                fits += _fits_safe(lambda *a, **k: [estimate_sigma(*a, **k)], phase_traj, i, **tail)
        else:
            fits += _fits_safe(einstein_convergence, phase_traj, model, **tail)

    fits = _fits_safe(fit_cone_slopes, traj, **tail) + fits
    reports = run_monitors(traj, model, cfg.monitors, cfg.normalization) + extra
    report.write_trajectory_csv(os.path.join(out_dir, cfg.out_trajectory), traj, model)
    report.write_monitors_csv(os.path.join(out_dir, cfg.out_monitors), reports)
    report.write_fits_csv(os.path.join(out_dir, cfg.out_fits), fits)
    checks = report.figure_checks(traj, model, cfg.tail_fraction) if model.r >= 2 else {}
    if plots and cfg.plots:
        notes = [f"{f.quantity}: a={f.params[0]:.4g}" for f in fits if f.quantity.startswith("g")]
        report.make_plots(out_dir, traj, model, cfg.label, notes)
    text = report.summary_text(cfg.label, model, cfg.mode, traj, reports, fits, checks)
    with open(os.path.join(out_dir, cfg.out_summary), "w", newline="\n") as fh:
        fh.write(text)
    horizon = cfg.min_horizon if cfg.min_horizon is not None else cfg.integrator.end
    if traj.events and any(loc < horizon for _, loc in traj.events):
        log.error("integration stopped early: %s", traj.events)
        return EXIT_EVENT
    return EXIT_OK


def _grid(cfg: RunConfig):
    """Sweep points in grid order, duplicates removed with a warning."""
    if cfg.mode == "physical":
        hb = cfg.sweep_hbar or cfg.hbar[:1]
        ub = cfg.sweep_ubar or (cfg.ubar,)
        if not cfg.sweep_hbar and not cfg.sweep_ubar:
            return []
        raw = list(itertools.product(hb, ub))
    else:
        raw = [(s,) for s in cfg.sweep_seed]
    seen, out = set(), []
    for p in raw:
        if p in seen:
            log.warning("duplicate sweep point %s ignored", p)
            continue
        seen.add(p)
        out.append(p)
    return out


def _point_config(cfg: RunConfig, point) -> RunConfig:
    if cfg.mode == "physical":
        return replace(cfg, hbar=(point[0],), ubar=point[1])
    return replace(cfg, seed=int(point[0]))


def _sweep_job(args):
    cfg, out_dir, plots = args
    try:
        code = execute(cfg, out_dir, plots)
    except Exception:  # recorded per run, the sweep continues
        traceback.print_exc()
        code = EXIT_INTERNAL
    passed = failed = 0
    path = os.path.join(out_dir, cfg.out_monitors)
    if os.path.exists(path):
        with open(path) as fh:
            rows = fh.read().splitlines()[1:]
        passed = sum(",pass," in r for r in rows)
        failed = sum(",fail," in r for r in rows)
    return code, passed, failed


def sweep(cfg: RunConfig, out_dir: str, workers: int = 1, plots: bool = True) -> int:
    points = _grid(cfg)
    if not points:
        log.error("sweep grid is empty")
        return EXIT_CONFIG
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(_point_config(cfg, p), os.path.join(out_dir, f"run_{k:03d}"), plots) for k, p in enumerate(points)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    keys = ["hbar", "ubar"] if cfg.mode == "physical" else ["seed"]
    header = ["index", *keys, "exit_code", "monitors_pass", "monitors_fail", "directory"]
    rows = [[k, *p, code, npass, nfail, f"run_{k:03d}"] for k, (p, (code, npass, nfail)) in
            enumerate(zip(points, results))]
    write_csv(os.path.join(out_dir, "index.csv"), header, rows)
    return next((r[0] for r in results if r[0] != 0), EXIT_OK)


def _workers(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("SOLITON_FLOW_WORKERS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soliton-flow", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value configuration file")
        s.add_argument("--preset", help="override the model with a named preset")
        s.add_argument("--out", default="out", help="output directory")
        s.add_argument("--workers", type=int, default=None)
        s.add_argument("--no-plots", action="store_true")
    c = sub.add_parser("critical-points")
    c.add_argument("--model", required=True, help='e.g. "dims=1,2;lambdas=0,1;epsilon=1"')
    c.add_argument("--out", required=True)
    c.add_argument("--shell-samples", type=int, default=0)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "critical-points":
            model = parse_model_spec(args.model)
            write_critical_points_csv(critical_points(model, args.shell_samples), args.out, model)
            return EXIT_OK
        if args.config is None and args.preset is None:
            raise ConfigError("either --config or --preset is required")
        cfg = load(args.config, args.preset)
        if args.command == "run":
            return execute(cfg, args.out, not args.no_plots)
        return sweep(cfg, args.out, _workers(args.workers), not args.no_plots)
    except (ConfigError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
