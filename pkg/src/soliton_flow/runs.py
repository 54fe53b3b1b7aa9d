"""Ready-made runs: series startup plus integration, and phase-space launches."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .integrator import IntegratorConfig, Trajectory, integrate
from .model import OrbitModel, TwoSummand
from .phase import (derived, einstein_launch, phase_field, physical_from_phase,
                    project_einstein, sample_launches)
from .physical import series_startup, vector_field


def _guard(model: OrbitModel):
    idx = np.arange(0, 2 * model.r, 2)
    return lambda x: x[..., idx]


def run_physical(model: OrbitModel, hbar, ubar: float, config: IntegratorConfig = IntegratorConfig(),
                 order: int = 6, t0: float = 1e-2, monitors=()) -> Trajectory:
    """Integrate from the singular orbit with the series startup at ``t0``."""
    x0 = series_startup(model, hbar, ubar, order, t0).to_vector()
    meta = {"space": "physical", "model": model.fingerprint(), "t0": t0, "u0": float(ubar),
            "C": model.C, "hbar": hbar, "order": order}
    return integrate(vector_field(model), x0, t0, config, monitors=monitors, guard=_guard(model), meta=meta)


def run_p_launches(model: OrbitModel, count: int = 10, delta: float = 1e-6, seed: int = 0,
                   config: IntegratorConfig = IntegratorConfig(h=1e-2, end=400.0)) -> Trajectory:
    """Batched phase runs from admissible launches near P (one batch axis)."""
    x0 = sample_launches(model, count, delta, seed)
    meta = {"space": "phase", "model": model.fingerprint(), "delta": delta, "seed": seed}
    return integrate(phase_field(model), x0, 0.0, config, variable="s", meta=meta)


def run_einstein(model: OrbitModel, delta: float = 1e-3, c_w: float = 1.0, c_y=1.0,
                 config: IntegratorConfig = IntegratorConfig(h=1e-3, end=120.0)) -> Trajectory:
    """Phase run on the locus {Q = 0, H = 1}.

    The locus is invariant but transversally unstable near the sink, so each
    step is followed by a projection back onto it.
    """
    x0 = einstein_launch(model, delta, c_w, c_y)
    meta = {"space": "phase", "model": model.fingerprint(), "einstein": True, "delta": delta}
    return integrate(phase_field(model), x0, 0.0, config, variable="s",
                     project=lambda v: project_einstein(v, model), meta=meta)


def to_physical(traj: Trajectory, model: OrbitModel, u_at_s0: float = 0.0) -> Trajectory:
    """Reconstruct arclength quantities along a single (unbatched) phase run."""
    out = physical_from_phase(traj, model, u_at_s0=u_at_s0)
    out.meta["t0"] = float(out.grid[0])
    if traj.meta.get("einstein"):
        out.meta["C"] = -model.epsilon * u_at_s0
    return out
