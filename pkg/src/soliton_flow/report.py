"""Artifact writers: trajectory/monitor/fit CSVs, text summary, SVG figures."""

from __future__ import annotations

import math
import os

import numpy as np

from .asymptotics import AsymptoticFit
from .integrator import Trajectory
from .model import OrbitModel
from .monitors import MonitorReport, Verdict
from .output import write_csv
from .physical import conserved, phase_vectors, unpack
from .svgplot import line_plot


def trajectory_table(traj: Trajectory, model: OrbitModel):
    r = model.r
    header = (["t"] + [f"g{i + 1}" for i in range(r)] + [f"gdot{i + 1}" for i in range(r)]
              + ["u", "udot", "xi", "trL", "S", "E", "cons1_residual", "ham_value"])
    g, gd, u, ud = unpack(traj.states)
    c = conserved(traj.states, model, C=traj.meta.get("C", model.C))
    cols = [traj.grid, *g, *gd, u, ud, c.xi, c.trL, c.S, c.E, c.cons1_residual, c.ham_value]
    return header, np.column_stack(cols)


def write_trajectory_csv(path, traj: Trajectory, model: OrbitModel) -> None:
    header, table = trajectory_table(traj, model)
    write_csv(path, header, table.tolist())


def write_phase_csv(path, traj: Trajectory, model: OrbitModel) -> None:
    from .phase import derived

    r = model.r
    dq = derived(traj.states, model)
    header = (["s"] + [f"X{i + 1}" for i in range(r)] + [f"Y{i + 1}" for i in range(r)]
              + ["W", "G", "H", "Q", "J"])
    table = np.column_stack([traj.grid, traj.states, dq.G, dq.H, dq.Q, dq.J])
    write_csv(path, header, table.tolist())


def write_monitors_csv(path, reports: list[MonitorReport]) -> None:
    header = ["name", "verdict", "worst_margin", "worst_location", "window_start", "window_end", "notes"]
    rows = [[r.name, r.verdict.value, r.worst_margin, r.worst_location, r.window[0], r.window[1], r.notes]
            for r in reports]
    write_csv(path, header, rows)


def write_fits_csv(path, fits: list[AsymptoticFit]) -> None:
    header = ["quantity", "model_form", "p0", "p1", "p2", "window_start", "window_end", "residual_rms",
              "target", "deviation", "ok", "notes"]
    rows = []
    for f in fits:
        p = list(f.params[:3]) + [math.nan] * (3 - min(3, len(f.params)))
        ok = "" if f.ok is None else ("true" if f.ok else "false")
        rows.append([f.quantity, f.model_form.value, *p, f.window[0], f.window[1], f.residual_rms,
                     f.target, f.deviation, ok, f.notes])
    write_csv(path, header, rows)


def figure_quantities(traj: Trajectory, model: OrbitModel) -> dict:
    """Normalized variables X~_i = X_i/sqrt(d_i), Y~_i = Y_i/sqrt(d_i) and their ratios.

    With this normalization Y~_1/Y~_2 = g_2/g_1.
    """
    v = phase_vectors(traj.states, model)
    r = model.r
    sd = np.sqrt(model.dims)
    Xt = v[:, :r] / sd
    Yt = v[:, r:2 * r] / sd
    out = {"Xt": Xt, "Yt": Yt}
    if r >= 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            out["Xratio"] = Xt[:, 0] / Xt[:, 1]
            out["Yratio"] = Yt[:, 0] / Yt[:, 1]
    return out


def figure_checks(traj: Trajectory, model: OrbitModel, frac: float = 0.2) -> dict:
    q = figure_quantities(traj, model)
    n = len(traj)
    tail = slice(n - max(int(math.ceil(frac * n)), min(50, n)), n)
    out = {"final_Xt_max": float(np.max(np.abs(q["Xt"][-1]))),
           "final_Yt_max": float(np.max(np.abs(q["Yt"][-1])))}
    if "Xratio" in q:
        yr = q["Yratio"][tail]
        out.update(final_Xratio=float(q["Xratio"][-1]), Yratio_tail_mean=float(np.mean(yr)),
                   Yratio_tail_cv=float(np.std(yr) / abs(np.mean(yr))))
    return out


def make_plots(out_dir, traj: Trajectory, model: OrbitModel, label: str, annotations=()) -> list[str]:
    """Write the three SVG figures into out_dir (created if missing) and return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    t = traj.grid
    g, _, u, _ = unpack(traj.states)
    q = figure_quantities(traj, model)
    # the normalized variables are singular at the startup point; start the
    # plots where they are O(1)
    paths = []
    p = os.path.join(out_dir, "metric_potential.svg")
    line_plot(p, [(f"g{i + 1}", t, g[i]) for i in range(model.r)] + [("u", t, u)],
              f"{label}: warping functions and potential", "t", "value", annotations)
    paths.append(p)
    p = os.path.join(out_dir, "normalized_variables.svg")
    keep = t >= min(1.0, t[-1])
    series = [(f"X~{i + 1}", t[keep], q["Xt"][keep, i]) for i in range(model.r)]
    series += [(f"Y~{i + 1}", t[keep], q["Yt"][keep, i]) for i in range(model.r)]
    line_plot(p, series, f"{label}: normalized phase variables", "t", "value")
    paths.append(p)
    if "Xratio" in q:
        p = os.path.join(out_dir, "ratios.svg")
        line_plot(p, [("X~1/X~2", t[keep], q["Xratio"][keep]), ("Y~1/Y~2", t[keep], q["Yratio"][keep])],
                  f"{label}: ratios", "t", "ratio")
        paths.append(p)
    return paths


def summary_text(label: str, model: OrbitModel, mode: str, traj: Trajectory, reports, fits,
                 checks: dict | None = None, violations=()) -> str:
    lines = ["soliton-flow run summary", f"model: {label} (fingerprint {model.fingerprint()})",
             f"mode: {mode}", f"samples: {len(traj)}, range [{traj.grid[0]:.6g}, {traj.grid[-1]:.6g}]",
             "events: " + (", ".join(f"{k} at {loc:.6g}" for k, loc in traj.events) or "none")]
    for v in violations:
        lines.append(f"validation: {v}")
    counts = {v: sum(r.verdict is v for r in reports) for v in Verdict}
    lines.append(f"monitors: {len(reports)} requested, {counts[Verdict.PASS]} pass, "
                 f"{counts[Verdict.FAIL]} fail, {counts[Verdict.NOT_APPLICABLE]} not applicable")
    for r in reports:
        lines.append(f"  {r.name:22s} {r.verdict.value:15s} margin={r.worst_margin:.6g} "
                     f"at {r.worst_location:.6g}  {r.notes}")
    lines.append(f"fits: {len(fits)}")
    for f in fits:
        ok = "-" if f.ok is None else ("ok" if f.ok else "poor")
        lines.append(f"  {f.quantity:22s} {ok:5s} params={np.array2string(np.asarray(f.params), precision=6)} "
                     f"deviation={f.deviation:.3g}")
    if checks:
        lines.append("figure checks:")
        for k, v in checks.items():
            lines.append(f"  {k} = {v:.6g}")
    return "\n".join(lines) + "\n"
