"""Trajectories leaving the critical point P go to conical ends.

For the warped model over S^1 x S^2 (d = (1, 2), lambda = (0, 1)) we launch
ten trajectories a distance 1e-6 from P along random admissible directions
of its unstable manifold and follow them in the phase time s out to 1e5.
Along the way they stay inside {Q <= 0, H <= 1}, and on the tail
W ~ 1/sqrt(eps s) and X_i ~ (eps/2) sqrt(d_i) W^2.

This takes about half a minute.  Run:  python3 demos/cones_from_p.py
"""

import numpy as np

from soliton_flow import IntegratorConfig, OrbitModel
from soliton_flow.asymptotics import arclength, check_lambda_limits, check_scaling_laws, fit_cone_slopes
from soliton_flow.monitors import check_region_invariance
from soliton_flow.runs import run_p_launches, to_physical

model = OrbitModel.warped([1, 2], [0.0, 1.0])
config = IntegratorConfig(h=1e-2, end=1e5, adaptive=True, rel_tol=1e-11)
batch = run_p_launches(model, 10, 1e-6, seed=1, config=config)
print("launch states (X1, X2, Y1, Y2, W):")
print(np.array_str(batch.states[0], precision=8))

for k in range(batch.states.shape[1]):
    tr = batch.member(k)
    region = check_region_invariance(tr, model)
    laws = {f.quantity: f for f in check_scaling_laws(tr, model)}
    lam = check_lambda_limits(tr, model)
    cone = fit_cone_slopes(to_physical(tr, model))
    print(f"launch {k}: region {region.verdict.value}, "
          f"W sqrt(eps s) = {laws['W_sqrt_eps_s'].params[1]:.4f}, "
          f"s/(eps t^2/4) = {laws['s_over_eps_t2_4'].params[1]:.4f}, "
          f"Lambda dev = {max(f.deviation for f in lam):.3f}, "
          f"cone slopes = {', '.join(f'{f.params[0]:.4f}' for f in cone)}")

# t(s) from integrating W ds; it grows like 2 sqrt(s/eps)
t = arclength(batch.member(0))
print("\nt at s = 1e5:", t[-1], " vs 2 sqrt(s) =", 2 * np.sqrt(batch.grid[-1]))
