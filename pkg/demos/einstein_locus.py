"""On the Einstein locus {Q = 0, H = 1} the flow runs into E+.

A point of the locus near P is integrated with fixed step h = 1e-3.  The
residuals of the two constraints stay at rounding level, the distance to
E+ shrinks to ~1e-11 and the recovered metric grows like exp(t sqrt(eps/2n)),
the hyperbolic end.  On the face Y = 0 the quantity J = G - eps W^2 / 2
obeys J' = 2J(J - 1) and decreases from 1 towards 0.

Run:  python3 demos/einstein_locus.py   (about 15 s per run)
"""

import math

import numpy as np

from soliton_flow import IntegratorConfig, OrbitModel, einstein_residuals
from soliton_flow.asymptotics import einstein_convergence, j_diagnostics
from soliton_flow.phase import e_plus
from soliton_flow.runs import run_einstein

model = OrbitModel.warped([1, 2], [0.0, 1.0])
config = IntegratorConfig(h=1e-3, end=80.0)
print("E+ =", e_plus(model))
print("target growth rate sqrt(eps/2n) =", math.sqrt(model.epsilon / (2 * model.n)))

for c_y in (1.0, 0.0):
    tr = run_einstein(model, 1e-3, 1.0, c_y, config)
    Q, H = einstein_residuals(tr.states, model)
    print(f"\nc_y = {c_y}: max |Q| = {np.max(np.abs(Q)):.2e}, max |H - 1| = {np.max(np.abs(H)):.2e}")
    for fit in einstein_convergence(tr, model):
        print(f"  {fit.quantity}: {fit.params[0]:.6g}  (deviation {fit.deviation:.2e})")
    jd = j_diagnostics(tr, model)
    key = "identity" if c_y == 0.0 else "corrected"
    print(f"  J: {jd['J'][0]:.4f} -> {jd['J'][-1]:.2e}, max rise {max(np.max(np.diff(jd['J'])), 0):.1e}, "
          f"max |{key}| = {np.max(np.abs(jd[key])):.1e}")
