"""Stationary points of the phase field and their spectra.

Lists every critical point (continuum families by representatives) for the
warped models over S^1 x S^2 and S^1 x S^2 x S^3, with the max-norm of the
field there and the real parts of the Jacobian eigenvalues.  P has spectrum
{2, 1 (r times), 0 (r times)}: the zero directions are the line through P
and the shell directions, the positive ones span the unstable manifold
the cone trajectories leave along.

Run:  python3 demos/critical_points_table.py
"""

import os

import numpy as np

from soliton_flow import OrbitModel, critical_points, rhs_phase
from soliton_flow.phase import write_critical_points_csv

np.set_printoptions(precision=4, suppress=True)
os.makedirs("demo_out", exist_ok=True)

for dims in ([1, 2], [1, 2, 3]):
    model = OrbitModel.warped(dims, list(range(len(dims))))
    print(f"\nd = {dims}, lambda = {model.lambdas.tolist()}, n = {model.n}")
    points = critical_points(model)
    for cp in points:
        res = np.max(np.abs(rhs_phase(cp.coords, model)))
        eig = np.sort(cp.eigenvalues.real)[::-1]
        print(f"  {cp.tag:12s} |F| = {res:.1e}  eig = {eig}")
    write_critical_points_csv(points, f"demo_out/critical_points_{len(dims)}.csv", model)
