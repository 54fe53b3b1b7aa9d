"""Example 1 with m = 1: start at the singular orbit, integrate, check.

The orbits are the twistor space of HP^1 (d1 = 2, d2 = 4) collapsing to a
round S^4 at t = 0.  With hbar = 6, ubar = -1 the solution is started from a
sixth-order power series at t0 = 0.01 and pushed to t = 20 with fixed-step RK4.  We then look at the
conservation residuals, run every structural check on the potential and
shape operator, and fit straight lines to g1 and g2 on the tail.

Run from the repository root:  python3 demos/example1_solution.py
"""

import numpy as np

from soliton_flow import IntegratorConfig, conserved, preset, startup_series
from soliton_flow.asymptotics import fit_cone_slopes
from soliton_flow.monitors import run_monitors
from soliton_flow.report import figure_checks, make_plots
from soliton_flow.runs import run_physical

model = preset("example1-m1")

# Low-order Taylor data at the singular orbit.  u''(0) = -1/3 and g2''(0) = 13/12.
series = startup_series(model, 6.0, -1.0, order=6)
print("u''(0)   =", 2 * series.u[2])
print("g2''(0)  =", 2 * series.g[1][2])
print("defect at t0 = 1e-2:", series.defect(1e-2))

traj = run_physical(model, 6.0, -1.0, IntegratorConfig(h=1e-3, end=20.0))
print(f"\n{len(traj)} samples on [{traj.grid[0]:.3g}, {traj.grid[-1]:.3g}], events: {traj.events or 'none'}")

c = conserved(traj.states, model)
print("max |cons1 residual| :", np.max(np.abs(c.cons1_residual)))
print("hamiltonian drift    :", np.ptp(c.ham_value))

print("\nstructural checks")
for rep in run_monitors(traj, model):
    print(f"  {rep.name:22s} {rep.verdict.value:15s} margin {rep.worst_margin: .3e}   {rep.notes}")

print("\nconical tail: g_i ~ a_i t + b_i")
for fit in fit_cone_slopes(traj):
    print(f"  {fit.quantity}: a = {fit.params[0]:.5f}, b = {fit.params[1]:.4f}, rel. residual {fit.deviation:.2e}")

# The scale-free variables decay, X1/X2 -> 1 and Y1/Y2 = g2/g1 settles.
for k, v in figure_checks(traj, model).items():
    print(f"  {k} = {v:.4g}")

paths = make_plots("demo_out/example1", traj, model, "example1-m1")
print("\nplots:", *paths, sep="\n  ")
