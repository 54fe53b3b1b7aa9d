"""Per-trajectory checks of the structural inequalities satisfied by
complete expanding solitons.

Every check returns a ``MonitorReport`` whose margin is positive when the
inequality holds.  Floats cannot certify strictness, so strict inequalities
report ``raw - tol`` and non-strict ones ``raw + tol``, with
``tol = 100*h^4``; a check passes only if the reported margin is positive.
A check that needs an inequality to hold "eventually" and finds its onset
too late reports ``0.5*t_end - onset``.  Samples with t < 2*t0 are ignored,
t0 being the first sample (the series startup point).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .integrator import Trajectory
from .model import Normalization, OrbitModel
from .physical import conserved, unpack, volume_density


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not_applicable"


@dataclass
class MonitorReport:
    name: str
    verdict: Verdict
    worst_margin: float
    worst_location: float
    notes: str = ""
    window: tuple = (math.nan, math.nan)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


def _na(name, notes, window=(math.nan, math.nan)):
    return MonitorReport(name, Verdict.NOT_APPLICABLE, math.nan, math.nan, notes, window)


def tolerance(traj: Trajectory) -> float:
    h = traj.meta.get("h")
    if h is None:
        h = float(np.median(np.diff(traj.grid))) if len(traj) > 1 else 0.0
    return 100.0 * h ** 4


def _window(traj: Trajectory):
    t0 = float(traj.meta.get("t0", traj.grid[0]))
    mask = traj.grid >= 2.0 * t0 - 1e-15
    return mask, (2.0 * t0, float(traj.grid[-1]))


def _C(traj: Trajectory, model: OrbitModel) -> float:
    return float(traj.meta.get("C", model.C))


def _worst(margin, t):
    i = int(np.argmin(margin))
    return float(margin[i]), float(t[i])


def _is_einstein(traj, model) -> bool:
    if traj.meta.get("einstein"):
        return True
    _, _, u, _ = unpack(traj.states)
    E = _C(traj, model) + model.epsilon * u
    return bool(np.max(np.abs(E)) <= max(1e-8, tolerance(traj)))


# -- potential --------------------------------------------------------------

def check_potential(traj: Trajectory, model: OrbitModel | None = None) -> MonitorReport:
    """u strictly decreasing and strictly concave beyond the startup window."""
    name = "potential"
    mask, win = _window(traj)
    t = traj.grid
    _, _, u, ud = unpack(traj.states)
    if mask.sum() < 3:
        return _na(name, "fewer than three samples beyond the startup window", win)
    if model is not None and _is_einstein(traj, model):
        return _na(name, "the potential is constant on Einstein trajectories", win)
    udd = np.gradient(ud, t)
    tol = tolerance(traj)
    m1 = -ud[mask] - tol
    m2 = -udd[mask] - tol
    a, at = _worst(m1, t[mask])
    b, bt = _worst(m2, t[mask])
    margin, loc = (a, at) if a <= b else (b, bt)
    ok = margin > 0
    details = {"min_neg_udot": a + tol, "min_neg_uddot": b + tol}
    if model is not None:
        c = conserved(traj.states, model, C=_C(traj, model))
        details["max_uddot_tt"] = float(np.max(c.uddot_tt[mask]))
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc,
                         "udot < 0 and uddot < 0" if ok else "potential not strictly decreasing and concave",
                         win, details)


def check_E_negative(traj: Trajectory, model: OrbitModel) -> MonitorReport:
    """E = C + eps*u < 0, including the value at the singular orbit."""
    name = "E_negative"
    mask, win = _window(traj)
    if _is_einstein(traj, model):
        return _na(name, "E vanishes identically on Einstein trajectories", win)
    C = _C(traj, model)
    _, _, u, _ = unpack(traj.states)
    E = C + model.epsilon * u[mask]
    t = traj.grid[mask]
    if "u0" in traj.meta:
        E = np.concatenate([[C + model.epsilon * traj.meta["u0"]], E])
        t = np.concatenate([[0.0], t])
    margin, loc = _worst(-E - tolerance(traj), t)
    ok = margin > 0
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc,
                         "E < 0 throughout" if ok else "E is not negative", win)


def check_mean_curvature(traj: Trajectory, model: OrbitModel) -> MonitorReport:
    """Eventually tr L < sqrt(n*eps/2).

    The bound is the limit of tr L on Einstein trajectories, so a margin
    within tolerance of zero is accepted and flagged as marginal.
    """
    name = "mean_curvature"
    mask, win = _window(traj)
    bound = math.sqrt(model.n * model.epsilon / 2.0)
    c = conserved(traj.states, model, C=_C(traj, model))
    t = traj.grid[mask]
    trL = c.trL[mask]
    tol = tolerance(traj)
    bad = np.flatnonzero(trL >= bound + tol)
    start = 0 if len(bad) == 0 else bad[-1] + 1
    if start >= len(t):
        return MonitorReport(name, Verdict.FAIL, float(bound + tol - trL[-1]), float(t[-1]),
                             f"tr L >= {bound:.6g} at the end of the run", win, {"bound": bound})
    t1 = float(t[start])
    # after t1 every sample has tr L < bound + tol, so this margin is positive
    margin, loc = _worst(bound + tol - trL[start:], t[start:])
    notes = f"tr L < {bound:.6g} for t >= {t1:.6g}"
    late = 0.5 * traj.grid[-1] - t1
    if late < 0:
        margin, loc = late, t1
        notes += ", onset later than half the run"
    ok = margin > 0
    if ok and margin <= 2 * tol:
        notes += " (marginal)"
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc, notes, win,
                         {"bound": bound, "t1": t1})


def check_potential_bounds(traj: Trajectory, model: OrbitModel,
                           normalization: Normalization = Normalization.C_ZERO) -> MonitorReport:
    """0 <= -u < (eps/4) t^2 + sqrt(-C) t and |udot| < (eps/2) t + sqrt(-C).

    Under ``C_ZERO`` the bounds are applied to u - u(0) with C + eps*u(0).
    """
    name = "potential_bounds"
    mask, win = _window(traj)
    eps = model.epsilon
    C = _C(traj, model)
    _, _, u, ud = unpack(traj.states)
    u0 = float(traj.meta.get("u0", 0.0))
    if normalization is Normalization.C_ZERO:
        u = u - u0
        Ct = C + eps * u0
    else:
        Ct = C
    if not Ct < 0:
        return _na(name, f"shifted constant {Ct} is not negative", win)
    t = traj.grid[mask]
    u, ud = u[mask], ud[mask]
    rc = math.sqrt(-Ct)
    tol = tolerance(traj)
    m_sign = -u + tol
    # at t = 0 both strict bounds degenerate to 0 < 0 and count as satisfied
    pos = t > 0
    if not pos.any():
        return _na(name, "no samples with t > 0", win)
    m_u = (0.25 * eps * t * t + rc * t + u)[pos] - tol
    m_ud = (0.5 * eps * t + rc - np.abs(ud))[pos] - tol
    parts = {"sign": _worst(m_sign, t), "u": _worst(m_u, t[pos]), "udot": _worst(m_ud, t[pos])}
    key = min(parts, key=lambda k: parts[k][0])
    margin, loc = parts[key]
    ok = margin > 0
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc,
                         f"C-tilde = {Ct:.6g}; tightest: {key}", win,
                         {"sign": parts["sign"][0] - tol, "u": parts["u"][0] + tol,
                          "udot": parts["udot"][0] + tol, "C_tilde": Ct})


def check_gradient_lower_bound(traj: Trajectory, model: OrbitModel) -> MonitorReport:
    """Linear lower bound on -udot and upper bound on uddot past t1.

    t1 is the first sample beyond 2*sqrt(5/eps) with tr L < sqrt(n*eps/2).
    """
    name = "gradient_lower_bound"
    mask, win = _window(traj)
    eps = model.epsilon
    lam0 = math.sqrt(model.n * eps / 2.0)
    C = _C(traj, model)
    u0 = float(traj.meta.get("u0", 0.0))
    Ct = C + eps * u0
    if _is_einstein(traj, model):
        return _na(name, "the potential is constant on Einstein trajectories", win)
    if not Ct <= 0:
        return _na(name, f"shifted constant {Ct} is positive", win)
    c = conserved(traj.states, model, C=C)
    t = traj.grid
    cand = np.flatnonzero(mask & (t > 2.0 * math.sqrt(5.0 / eps)) & (c.trL < lam0))
    if len(cand) == 0:
        return _na(name, "no sample beyond 2*sqrt(5/eps) with tr L below the bound", win)
    i1 = int(cand[0])
    t1 = float(t[i1])
    _, _, _, ud = unpack(traj.states)
    udd = np.gradient(ud, t)
    a = lam0 + math.sqrt(-Ct)
    coef = -ud[i1] / (0.5 * eps * t1 + a)
    tt = t[i1:]
    tol = tolerance(traj)
    m1 = -ud[i1:] - 0.9 * coef * (0.5 * eps * tt + a) - tol
    m2 = 0.5 * eps * (1.0 - 0.9 * coef) - (udd[i1:] + 0.5 * eps) + tol
    w1, l1 = _worst(m1, tt)
    w2, l2 = _worst(m2, tt)
    ok = w1 > 0 and w2 > 0
    # asymptotic slope of -udot on the last fifth of the run
    tail = t >= 0.8 * t[-1]
    slope = float(np.polyfit(t[tail], -ud[tail], 1)[0]) if tail.sum() >= 2 else math.nan
    margin, loc = (w1, l1) if w1 <= w2 else (w2, l2)
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc,
                         f"t1 = {t1:.6g}", win,
                         {"t1": t1, "margin_i": w1, "margin_ii": w2, "neg_udot_slope": slope,
                          "slope_ok": bool(abs(slope - 0.5 * eps) <= 0.2 * 0.5 * eps)})


# -- Lyapunov and volume -------------------------------------------------------

def f0_values(x, model: OrbitModel) -> np.ndarray:
    """v^(2/n) (S + tr((L^0)^2)) with L^0 the trace-free shape operator."""
    c = conserved(x, model)
    v = volume_density(x, model)
    n = model.n
    return v ** (2.0 / n) * (c.S + c.trL2 - c.trL ** 2 / n)


def check_F0_lyapunov(traj: Trajectory, model: OrbitModel) -> MonitorReport:
    name = "F0_lyapunov"
    mask, win = _window(traj)
    t = traj.grid[mask]
    F = f0_values(traj.states[mask], model)
    if len(F) < 2:
        return _na(name, "too few samples", win)
    tol = tolerance(traj)
    dF = np.diff(F)
    up = np.flatnonzero(dF > tol)
    start = 0 if len(up) == 0 else up[-1] + 1
    if start >= len(dF):
        return MonitorReport(name, Verdict.FAIL, float(tol - dF[-1]), float(t[-1]),
                             "F0 still increasing at the end of the run", win)
    onset = float(t[start])
    margin, loc = _worst(tol - dF[start:], t[start + 1:])
    notes = f"F0 non-increasing for t >= {onset:.6g}"
    late = 0.5 * traj.grid[-1] - onset
    if late < 0:
        margin, loc = late, onset
        notes += ", onset later than half the run"
    ok = margin > 0
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc, notes, win,
                         {"onset": onset})


def check_volume_growth(traj: Trajectory, model: OrbitModel) -> MonitorReport:
    """At least logarithmic volume growth, tested by a proxy.

    vol(t) is the integral of prod g_i^{d_i}.  Pass requires a positive
    coefficient in a fit of vol against log t over the last half, and an
    unboundedness trend: vol(end) > 2 vol(mid), or t*v(t) bounded below by
    half its midpoint value over the last half (then vol grows at least
    like a multiple of log t).
    """
    name = "volume_growth"
    mask, win = _window(traj)
    t = traj.grid
    if t[-1] < 10:
        return _na(name, "run shorter than t = 10", win)
    v = volume_density(traj.states, model)
    vol = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])
    half = (t >= 0.5 * t[-1]) & mask & (t > 0)
    if half.sum() < 3:
        return _na(name, "too few samples in the last half", win)
    coef = float(np.polyfit(np.log(t[half]), vol[half], 1)[0])
    i_mid = int(np.flatnonzero(half)[0])
    ratio = vol[-1] / vol[i_mid] if vol[i_mid] > 0 else math.inf
    tv = t[half] * v[half]
    tv_ratio = float(np.min(tv) / tv[0]) if tv[0] > 0 else 0.0
    trend = max(ratio - 2.0, tv_ratio - 0.5)
    margin = min(coef, trend)
    ok = margin > 0
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, float(t[-1]),
                         f"log-fit coefficient {coef:.6g}, vol(end)/vol(mid) {ratio:.6g}", win,
                         {"log_coef": coef, "vol_ratio": float(ratio), "tv_ratio": tv_ratio})


# -- phase space --------------------------------------------------------------

def check_region_invariance(traj_phase: Trajectory, model: OrbitModel) -> MonitorReport:
    """Q < 0 and H < 1 persist along a phase run launched inside the region."""
    from .phase import derived

    name = "region_invariance"
    s = traj_phase.grid
    win = (float(s[0]), float(s[-1]))
    dq = derived(traj_phase.states, model)
    h = traj_phase.meta.get("h", 0.0)
    tol = max(1e-8, 100.0 * h ** 4)
    Q = dq.Q.reshape(len(s), -1)
    Hm = (dq.H - 1.0).reshape(len(s), -1)
    if np.max(np.abs(Q)) <= tol and np.max(np.abs(Hm)) <= tol:
        return _na(name, "trajectory lies on the Einstein locus Q = 0", win)
    if np.any(Q[0] >= 0) or np.any(Hm[0] >= 0):
        return _na(name, "launch point is not inside {Q < 0, H < 1}", win)
    margin_all = np.minimum(tol - Q, tol - Hm).min(axis=1)
    margin, loc = _worst(margin_all, s)
    ok = margin > 0
    return MonitorReport(name, Verdict.PASS if ok else Verdict.FAIL, margin, loc,
                         f"max Q = {np.max(Q):.3g}, max H - 1 = {np.max(Hm):.3g}", win,
                         {"max_Q": float(np.max(Q)), "max_H_minus_1": float(np.max(Hm)), "tol": tol})


PHYSICAL_MONITORS = {
    "potential": lambda tr, m, nz: check_potential(tr, m),
    "E_negative": lambda tr, m, nz: check_E_negative(tr, m),
    "mean_curvature": lambda tr, m, nz: check_mean_curvature(tr, m),
    "potential_bounds": lambda tr, m, nz: check_potential_bounds(tr, m, nz),
    "gradient_lower_bound": lambda tr, m, nz: check_gradient_lower_bound(tr, m),
    "F0_lyapunov": lambda tr, m, nz: check_F0_lyapunov(tr, m),
    "volume_growth": lambda tr, m, nz: check_volume_growth(tr, m),
}


def run_monitors(traj: Trajectory, model: OrbitModel, names=None,
                 normalization: Normalization = Normalization.C_ZERO) -> list[MonitorReport]:
    names = list(PHYSICAL_MONITORS) if names is None else list(names)
    unknown = [n for n in names if n not in PHYSICAL_MONITORS]
    if unknown:
        raise KeyError(f"unknown monitors {unknown}; choose from {list(PHYSICAL_MONITORS)}")
    return [PHYSICAL_MONITORS[n](traj, model, normalization) for n in names]
