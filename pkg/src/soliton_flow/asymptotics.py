"""Tail fits for the asymptotic behaviour of trajectories.

All fits are ordinary least squares (or means, for constant limits) on a
declared tail window: by default the last 20% of the samples, at least 50.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .integrator import Trajectory
from .model import OrbitModel
from .phase import derived, e_plus, rhs_phase, split
from .physical import unpack


class ModelForm(enum.Enum):
    LINEAR = "linear"
    POWER_LAW = "power_law"
    LOG_LINEAR = "log_linear"
    CONSTANT_LIMIT = "constant_limit"


@dataclass
class AsymptoticFit:
    quantity: str
    model_form: ModelForm
    params: np.ndarray
    window: tuple
    residual_rms: float
    target: float = math.nan
    deviation: float = math.nan
    ok: bool | None = None
    notes: str = ""
    details: dict = field(default_factory=dict)


def tail_mask(grid, frac: float = 0.2, min_points: int = 50) -> np.ndarray:
    n = len(grid)
    if n < min_points:
        raise ValueError(f"need at least {min_points} samples for a tail fit, have {n}")
    k = max(int(math.ceil(frac * n)), min_points)
    mask = np.zeros(n, dtype=bool)
    mask[n - k:] = True
    return mask


def _win(x, mask):
    return (float(x[mask][0]), float(x[mask][-1]))


def _linear(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return coef, float(np.sqrt(np.mean(res ** 2)))


def _constant(name, values, x, mask, target, tol, notes=""):
    v = values[mask]
    mean = float(np.mean(v))
    rms = float(np.sqrt(np.mean((v - mean) ** 2)))
    dev = abs(mean - target) / abs(target) if target != 0 else abs(mean)
    return AsymptoticFit(name, ModelForm.CONSTANT_LIMIT, np.array([mean, float(v[-1])]), _win(x, mask),
                         rms, target, dev, bool(dev <= tol), notes)


def fit_cone_slopes(traj: Trajectory, frac: float = 0.2, min_points: int = 50,
                    rel_tol: float = 1e-2) -> list[AsymptoticFit]:
    """Linear fits g_i = a_i t + b_i on the tail; ok when rms/|g| < rel_tol."""
    t = traj.grid
    mask = tail_mask(t, frac, min_points)
    g, _, _, _ = unpack(traj.states)
    out = []
    for i, gi in enumerate(g):
        coef, rms = _linear(t[mask], gi[mask])
        scale = float(np.sqrt(np.mean(gi[mask] ** 2)))
        rel = rms / scale
        out.append(AsymptoticFit(f"g{i + 1}", ModelForm.LINEAR, coef, _win(t, mask), rms, math.nan, rel,
                                 bool(rel < rel_tol), f"relative residual {rel:.3g}"))
    return out


def check_lambda_limits(traj_phase: Trajectory, model: OrbitModel, frac: float = 0.2,
                        min_points: int = 50, tol: float = 0.1) -> list[AsymptoticFit]:
    """Tail estimates of lim X_i / W^2 against (eps/2) sqrt(d_i)."""
    s = traj_phase.grid
    mask = tail_mask(s, frac, min_points)
    X, _, W = split(traj_phase.states)
    target = 0.5 * model.epsilon * np.sqrt(model.dims)
    return [_constant(f"Lambda{i + 1}", X[:, i] / W ** 2, s, mask, float(target[i]), tol)
            for i in range(model.r)]


def arclength(traj_phase: Trajectory, t_at_s0: float = 0.0) -> np.ndarray:
    """t(s) = t(s0) + integral of W ds (trapezoid)."""
    s = traj_phase.grid
    W = traj_phase.states[:, -1]
    return t_at_s0 + np.concatenate([[0.0], np.cumsum(0.5 * (W[1:] + W[:-1]) * np.diff(s))])


def check_scaling_laws(traj_phase: Trajectory, model: OrbitModel, t=None, frac: float = 0.2,
                       min_points: int = 50, tol: float = 0.1) -> list[AsymptoticFit]:
    """W ~ 1/sqrt(eps s), s ~ eps t^2 / 4 and a_1 W^4 <= G <= a_2 W^4 on the tail.

    The two ratio tests depend on where s = 0 is put (the system is
    autonomous in s); the slope fits of 1/W^2 against s and of sqrt(s)
    against t do not, and are reported alongside.
    """
    eps = model.epsilon
    s = traj_phase.grid
    if t is None:
        t = arclength(traj_phase)
    mask = tail_mask(s, frac, min_points) & (s > 0) & (t > 0)
    if mask.sum() < 2:
        raise ValueError("tail window needs positive s and t")
    X, _, W = split(traj_phase.states)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_ratio = s / (0.25 * eps * t ** 2)
    out = [
        _constant("W_sqrt_eps_s", W * np.sqrt(eps * np.maximum(s, 0.0)), s, mask, 1.0, tol),
        _constant("s_over_eps_t2_4", s_ratio, s, mask, 1.0, tol),
    ]
    coef, rms = _linear(s[mask], 1.0 / W[mask] ** 2)
    dev = abs(coef[0] / eps - 1.0)
    out.append(AsymptoticFit("inv_W2_slope", ModelForm.LINEAR, coef, _win(s, mask), rms, eps, dev,
                             bool(dev <= tol), "slope of 1/W^2 against s"))
    coef, rms = _linear(t[mask], np.sqrt(s[mask]))
    target = 0.5 * math.sqrt(eps)
    dev = abs(coef[0] / target - 1.0)
    out.append(AsymptoticFit("sqrt_s_slope", ModelForm.LINEAR, coef, _win(s, mask), rms, target, dev,
                             bool(dev <= tol), "slope of sqrt(s) against t"))
    ratio = np.sum(X * X, axis=1)[mask] / W[mask] ** 4
    a1, a2 = float(np.min(ratio)), float(np.max(ratio))
    out.append(AsymptoticFit("G_over_W4", ModelForm.CONSTANT_LIMIT, np.array([a1, a2]), _win(s, mask),
                             float(np.std(ratio)), math.nan, math.nan, bool(0 < a1 <= a2 < math.inf),
                             "bounds a1 <= G/W^4 <= a2"))
    return out


def einstein_convergence(traj_phase: Trajectory, model: OrbitModel, frac: float = 0.2,
                         min_points: int = 50, tol: float = 0.05) -> list[AsymptoticFit]:
    """Distance to E+ at the end of the run and log-growth rates of g_i.

    The rate target sqrt(eps/(2n)) is gdot_i/g_i = X_i/(sqrt(d_i) W) at E+.
    Rates are fitted against the reconstructed arclength.
    """
    s = traj_phase.grid
    v = traj_phase.states
    dist = np.max(np.abs(v - e_plus(model)), axis=1)
    out = [AsymptoticFit("distance_to_E_plus", ModelForm.CONSTANT_LIMIT, np.array([dist[-1]]),
                         (float(s[-1]), float(s[-1])), 0.0, 0.0, float(dist[-1]), None,
                         "max-norm distance at the final sample")]
    t = arclength(traj_phase)
    mask = tail_mask(s, frac, min_points)
    _, Y, W = split(v)
    target = math.sqrt(model.epsilon / (2.0 * model.n))
    sd = np.sqrt(model.dims)
    for i in range(model.r):
        if np.any(Y[mask, i] <= 0):
            continue
        logg = np.log(sd[i] * W[mask] / Y[mask, i])
        coef, rms = _linear(t[mask], logg)
        dev = abs(coef[0] / target - 1.0)
        out.append(AsymptoticFit(f"log_g{i + 1}_rate", ModelForm.LOG_LINEAR, coef, _win(t, mask), rms, target,
                                 dev, bool(dev <= tol)))
    return out


def j_diagnostics(traj_phase: Trajectory, model: OrbitModel) -> dict:
    """J = G - (eps/2) W^2 along a run with its exact derivative from the field.

    ``identity`` is J' - 2J(J-1), which vanishes on {Q = 0, H = 1, Y = 0}.
    Off the face Y = 0 one has J' - 2J(J-1) = 2 sum lambda_i X_i Y_i^2 / sqrt(d_i)
    on the locus; ``corrected`` subtracts that term.
    """
    v = traj_phase.states
    X, Y, W = split(v)
    dv = rhs_phase(v, model)
    dX, _, dW = split(dv)
    eps = model.epsilon
    J = np.sum(X * X, axis=1) - 0.5 * eps * W * W
    Jp = 2.0 * np.sum(X * dX, axis=1) - eps * W * dW
    identity = Jp - 2.0 * J * (J - 1.0)
    extra = 2.0 * np.sum(model.lambdas * X * Y * Y / np.sqrt(model.dims), axis=1)
    dq = derived(v, model)
    return {"J": J, "Jprime": Jp, "identity": identity, "corrected": identity - extra,
            "Q": dq.Q, "H_minus_1": dq.H - 1.0}


def estimate_sigma(traj_phase: Trajectory, i: int, frac: float = 0.2, min_points: int = 50) -> AsymptoticFit:
    """Tail behaviour of W/Y_i (i is 1-based).

    Reports monotonicity and whether a finite plateau is visible.  Growth is
    called divergent when the tail slope is positive and either the final
    value exceeds ten times the run median or a power law fitted on the tail
    has exponent above 0.05 (a plateau drives the exponent to zero).  This is
    an estimate, not a proof.
    """
    s = traj_phase.grid
    _, Y, W = split(traj_phase.states)
    ratio = W / Y[:, i - 1]
    mask = tail_mask(s, frac, min_points)
    coef, rms = _linear(s[mask], ratio[mask])
    pos = mask & (s > 0) & (ratio > 0)
    exponent = _linear(np.log(s[pos]), np.log(ratio[pos]))[0][0] if pos.sum() >= 2 else math.nan
    d = np.diff(ratio)
    monotone = bool(np.all(d >= -1e-12 * np.maximum(1.0, np.abs(ratio[1:]))))
    divergent = bool(coef[0] > 0 and (ratio[-1] > 10.0 * np.median(ratio) or exponent > 0.05))
    notes = "no finite plateau detected" if divergent else "plateau not excluded"
    return AsymptoticFit(f"sigma{i}", ModelForm.LINEAR, np.array([coef[0], coef[1], ratio[-1]]), _win(s, mask),
                         rms, math.inf, math.nan, monotone, notes,
                         {"monotone": monotone, "divergent": divergent, "final": float(ratio[-1]),
                          "tail_exponent": float(exponent)})
