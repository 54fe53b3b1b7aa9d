"""Phase-space form of the warped-product soliton equations.

Variables, with xi = -udot + tr L and d/ds = (1/xi) d/dt:

    X_i = sqrt(d_i) L_i / xi,   Y_i = sqrt(d_i) / (xi g_i),   W = 1 / xi.

Phase vectors are laid out as ``(X_1..X_r, Y_1..Y_r, W)``.  All array
functions accept leading batch axes.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CoordinateBreakdownError, ModelMismatchError
from .integrator import Trajectory
from .model import OrbitModel, require_warped


@dataclass
class PhaseState:
    X: np.ndarray
    Y: np.ndarray
    W: float
    s: float = 0.0

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.X, self.Y, [self.W]])

    @classmethod
    def from_vector(cls, v, s=0.0):
        v = np.asarray(v, dtype=float)
        r = (len(v) - 1) // 2
        return cls(v[:r].copy(), v[r:2 * r].copy(), float(v[-1]), float(s))


def _vec(state):
    return state.to_vector() if isinstance(state, PhaseState) else np.asarray(state, dtype=float)


def split(v):
    v = np.asarray(v, dtype=float)
    r = (v.shape[-1] - 1) // 2
    return v[..., :r], v[..., r:2 * r], v[..., -1]


@dataclass
class DerivedQuantities:
    G: np.ndarray
    H: np.ndarray
    Lyap: np.ndarray
    Q: np.ndarray
    J: np.ndarray
    E_over_xi2: np.ndarray


def derived(state, model: OrbitModel) -> DerivedQuantities:
    require_warped(model)
    X, Y, W = split(_vec(state))
    sd = np.sqrt(model.dims)
    lam = model.lambdas
    eps = model.epsilon
    G = np.sum(X * X, axis=-1)
    H = X @ sd
    Lyap = G + (Y * Y) @ lam - 1.0
    Q = Lyap + 0.5 * eps * (model.n - 1) * W * W
    J = G - 0.5 * eps * W * W
    return DerivedQuantities(G, H, Lyap, Q, J, Q)


def rhs_phase(state, model: OrbitModel):
    """The phase vector field; returns the same type as ``state``."""
    require_warped(model)
    v = _vec(state)
    X, Y, W = split(v)
    sd = np.sqrt(model.dims)
    lam = model.lambdas
    eps = model.epsilon
    G = np.sum(X * X, axis=-1)[..., None]
    W = W[..., None]
    hw2 = 0.5 * eps * W * W
    Xp = X * (G - 1.0) + (lam / sd) * Y * Y + hw2 * (sd - X)
    Yp = Y * (G - X / sd - hw2)
    Wp = W * (G - hw2)
    out = np.concatenate([Xp, Yp, Wp], axis=-1)
    if isinstance(state, PhaseState):
        return PhaseState.from_vector(out, state.s)
    return out


def phase_field(model: OrbitModel):
    require_warped(model)
    return lambda s, v: rhs_phase(v, model)


def _require_circle_start(model: OrbitModel):
    require_warped(model)
    if model.lambdas[0] != 0 or model.dims[0] != 1:
        raise ModelMismatchError("the Y_1-omitted subsystem needs a circle factor with lambda_1 = 0")


def subsystem_vector(v) -> np.ndarray:
    """Drop the Y_1 entry: ``(X_1..X_r, Y_2..Y_r, W)``."""
    v = np.asarray(v, dtype=float)
    r = (v.shape[-1] - 1) // 2
    return np.delete(v, r, axis=-1)


def full_vector(w, y1) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    r = w.shape[-1] // 2
    return np.insert(w, r, y1, axis=-1)


def rhs_subsystem(w, model: OrbitModel) -> np.ndarray:
    """Vector field of the system with the Y_1 equation omitted.

    With lambda_1 = 0 no other equation involves Y_1, so this is the full
    field with the Y_1 row deleted.
    """
    _require_circle_start(model)
    return subsystem_vector(rhs_phase(full_vector(w, 0.0), model))


def subsystem_field(model: OrbitModel):
    _require_circle_start(model)
    return lambda s, w: rhs_subsystem(w, model)


def _trapezoid_cumulative(y, x, i0):
    """Cumulative trapezoid integral of samples ``y`` anchored at index ``i0``."""
    seg = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum - cum[i0]


def reconstruct_y1(traj: Trajectory, y1_at_s0: float, s0: float, model: OrbitModel) -> np.ndarray:
    """Recover Y_1 along a run from ``Y_1(s0)`` by quadrature.

    Works on both full and subsystem trajectories since only X and W are used.
    """
    s = traj.grid
    if not s[0] - 1e-12 <= s0 <= s[-1] + 1e-12:
        raise ValueError(f"s0 = {s0} outside the sampled range [{s[0]}, {s[-1]}]")
    r = model.r
    X = traj.states[:, :r]
    W = traj.states[:, -1]
    integrand = np.sum(X * X, axis=1) - X[:, 0] / np.sqrt(model.dims[0]) - 0.5 * model.epsilon * W * W
    i0 = int(np.argmin(np.abs(s - s0)))
    if abs(s[i0] - s0) > 1e-9 * max(1.0, abs(s0)):
        raise ValueError("s0 must be a sample point of the trajectory")
    return y1_at_s0 * np.exp(_trapezoid_cumulative(integrand, s, i0))


# -- critical points ----------------------------------------------------------

class Family(enum.Enum):
    ORIGIN = "origin"
    SPHERE_SHELL = "sphere_shell"
    SUBSET_RHO_A = "subset_rho_a"
    Y1_LINE = "y1_line"
    X1_LINE = "x1_line"
    E_PLUS = "e_plus"
    E_MINUS = "e_minus"


@dataclass
class CriticalPoint:
    coords: np.ndarray
    family: Family
    eigenvalues: Optional[np.ndarray] = None
    subset: tuple = ()
    direction: Optional[np.ndarray] = None

    @property
    def tag(self) -> str:
        if self.family is Family.SUBSET_RHO_A:
            return f"{self.family.value}{{{','.join(str(i) for i in self.subset)}}}"
        return self.family.value


def critical_points(model: OrbitModel, shell_samples: int = 0, seed: int = 0, eigen: bool = True):
    """Enumerate the stationary points of the phase field.

    Continuum families are reported by representatives: the 2r axis points
    of the shell sum X^2 = 1 (plus ``shell_samples`` random shell points),
    and one point plus a direction for each line.
    """
    _require_circle_start(model)
    if np.any(model.dims[1:] <= 1):
        raise ModelMismatchError("critical-point enumeration needs d_i > 1 for i > 1")
    r = model.r
    dims, lam, eps, n = model.dims, model.lambdas, model.epsilon, model.n
    size = 2 * r + 1
    out = [CriticalPoint(np.zeros(size), Family.ORIGIN)]
    for i in range(r):
        for sign in (1.0, -1.0):
            p = np.zeros(size)
            p[i] = sign
            out.append(CriticalPoint(p, Family.SPHERE_SHELL))
    rng = np.random.default_rng(seed)
    for _ in range(shell_samples):
        p = np.zeros(size)
        x = rng.normal(size=r)
        p[:r] = x / np.linalg.norm(x)
        out.append(CriticalPoint(p, Family.SPHERE_SHELL))
    for k in range(1, r):
        for A in itertools.combinations(range(1, r), k):
            rho = 1.0 / sum(dims[j] for j in A)
            p = np.zeros(size)
            for j in A:
                p[j] = np.sqrt(dims[j]) * rho
                p[r + j] = np.sqrt(dims[j] / lam[j] * rho * (1.0 - rho))
            out.append(CriticalPoint(p, Family.SUBSET_RHO_A, subset=tuple(j + 1 for j in A)))
    # line (iv): only Y_1 nonzero; line (v): P with the Y_1 direction
    p = np.zeros(size)
    p[r] = 1.0
    direction = np.zeros(size)
    direction[r] = 1.0
    out.append(CriticalPoint(p, Family.Y1_LINE, direction=direction))
    out.append(CriticalPoint(p_point(model), Family.X1_LINE, direction=direction.copy()))
    for sign, fam in ((1.0, Family.E_PLUS), (-1.0, Family.E_MINUS)):
        p = np.zeros(size)
        p[:r] = np.sqrt(dims) / n
        p[-1] = sign * np.sqrt(2.0 / (n * eps))
        out.append(CriticalPoint(p, fam))
    if eigen:
        for cp in out:
            cp.eigenvalues = linearize(cp.coords, model)[1]
    return out


def e_plus(model: OrbitModel) -> np.ndarray:
    require_warped(model)
    p = np.zeros(2 * model.r + 1)
    p[:model.r] = np.sqrt(model.dims) / model.n
    p[-1] = np.sqrt(2.0 / (model.n * model.epsilon))
    return p


def p_point(model: OrbitModel) -> np.ndarray:
    """The point P: X_1 = Y_1 = 1, everything else zero."""
    p = np.zeros(2 * model.r + 1)
    p[0] = 1.0
    p[model.r] = 1.0
    return p


def jacobian(state, model: OrbitModel) -> np.ndarray:
    require_warped(model)
    X, Y, W = split(_vec(state))
    r = model.r
    sd = np.sqrt(model.dims)
    lam = model.lambdas
    eps = model.epsilon
    G = float(X @ X)
    hw2 = 0.5 * eps * W * W
    Jm = np.zeros((2 * r + 1, 2 * r + 1))
    Jm[:r, :r] = 2.0 * np.outer(X, X) + np.diag(np.full(r, G - 1.0 - hw2))
    Jm[:r, r:2 * r] = np.diag(2.0 * lam * Y / sd)
    Jm[:r, -1] = eps * (sd - X) * W
    Jm[r:2 * r, :r] = 2.0 * np.outer(Y, X) - np.diag(Y / sd)
    Jm[r:2 * r, r:2 * r] = np.diag(G - X / sd - hw2)
    Jm[r:2 * r, -1] = -eps * W * Y
    Jm[-1, :r] = 2.0 * W * X
    Jm[-1, -1] = G - 3.0 * hw2
    return Jm


def linearize(state, model: OrbitModel):
    """Return the analytic Jacobian and its eigenvalues (sorted, descending real part)."""
    Jm = jacobian(state, model)
    ev = np.linalg.eigvals(Jm)
    ev = ev[np.lexsort((ev.imag, -ev.real))]
    return Jm, ev


def einstein_residuals(state, model: OrbitModel):
    dq = derived(state, model)
    return dq.Q, dq.H - 1.0


def write_critical_points_csv(points, path, model: OrbitModel):
    """One row per point: family tag, coordinates, eigenvalues as re/im pairs."""
    from .output import write_csv

    r = model.r
    size = 2 * r + 1
    header = ["family"] + [f"X{i + 1}" for i in range(r)] + [f"Y{i + 1}" for i in range(r)] + ["W"]
    for k in range(size):
        header += [f"ev{k + 1}_re", f"ev{k + 1}_im"]
    rows = []
    for cp in points:
        ev = cp.eigenvalues if cp.eigenvalues is not None else np.full(size, np.nan)
        row = [cp.tag] + list(cp.coords)
        for z in ev:
            row += [z.real, z.imag]
        rows.append(row)
    write_csv(path, header, rows)


# -- launches ---------------------------------------------------------------

def p_eigenvectors(model: OrbitModel):
    """Unstable directions at P: the eigenvalue-2 vector and the eigenvalue-1 vectors
    (unit Y_i for i > 1 and unit W)."""
    r = model.r
    size = 2 * r + 1
    e2 = np.zeros(size)
    e2[0] = 1.0
    e2[r] = 0.5
    ones = []
    for i in range(1, r):
        e = np.zeros(size)
        e[r + i] = 1.0
        ones.append(e)
    e = np.zeros(size)
    e[-1] = 1.0
    ones.append(e)
    return e2 / np.linalg.norm(e2), ones


def launch_from_p(model: OrbitModel, delta: float, a2: float, a1) -> np.ndarray:
    """State ``P + delta*v`` with ``v`` proportional to ``a2*e_2 + sum a1_k e_1^k``.

    ``a1`` has r entries: coefficients of Y_2..Y_r, then W.
    """
    e2, ones = p_eigenvectors(model)
    v = a2 * e2 + sum(c * e for c, e in zip(a1, ones))
    return p_point(model) + delta * v / np.linalg.norm(v)


def admissible_direction(model: OrbitModel, rng, delta: float):
    """Sample eigen-coefficients whose launch lies in {Q < 0, H < 1}.

    The Y_i and W coefficients are positive.  Along the eigenvalue-2
    direction Q and H - 1 are first order in the step while along the others
    they are second order, so the eigenvalue-2 coefficient is taken negative
    and of size O(delta), large enough to make Q negative.
    """
    lam = model.lambdas
    eps = model.epsilon
    r = model.r
    rho = rng.uniform(0.2, 2.0, size=r - 1)
    quad = float(np.sum(lam[1:] * rho ** 2) + 0.5 * eps * (model.n - 1))
    kappa = 0.5 * quad * rng.uniform(1.2, 4.0)
    e2, _ = p_eigenvectors(model)
    a2 = -kappa * delta / e2[0]
    return a2, np.concatenate([rho, [1.0]])


def sample_launches(model: OrbitModel, count: int, delta: float = 1e-6, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a2, a1 = admissible_direction(model, rng, delta)
        out.append(launch_from_p(model, delta, a2, a1))
    return np.array(out)


def einstein_launch(model: OrbitModel, delta: float = 1e-3, c_w: float = 1.0, c_y=1.0) -> np.ndarray:
    """A point near P on {Q = 0, H = 1}.

    W = delta*c_w, Y_i = delta*c_y (i > 1), Y_1 = 1; X_3.. = 0 and
    (X_1, X_2) solve the two constraints.  ``c_y = 0`` gives a point on the
    face Y_2 = .. = Y_r = 0.
    """
    _require_circle_start(model)
    r = model.r
    dims, lam, eps = model.dims, model.lambdas, model.epsilon
    v = np.zeros(2 * r + 1)
    v[-1] = delta * c_w
    v[r] = 1.0
    v[r + 1:2 * r] = delta * np.broadcast_to(c_y, (r - 1,))
    K = float(np.sum(lam[1:] * v[r + 1:2 * r] ** 2) + 0.5 * eps * (model.n - 1) * v[-1] ** 2)
    d2 = dims[1]
    disc = 4.0 * d2 - 4.0 * (d2 + 1.0) * K
    if disc < 0:
        raise ValueError("launch offset too large for the constraint surface")
    X2 = 2.0 * K / (2.0 * np.sqrt(d2) + np.sqrt(disc))
    v[1] = X2
    v[0] = 1.0 - np.sqrt(d2) * X2
    return v


def project_einstein(v, model: OrbitModel, iters: int = 2) -> np.ndarray:
    """Minimum-norm Gauss-Newton projection onto {Q = 0, H = 1}."""
    v = np.array(v, dtype=float)
    r = model.r
    sd = np.sqrt(model.dims)
    lam = model.lambdas
    c = 0.5 * model.epsilon * (model.n - 1)
    for _ in range(iters):
        X, Y, W = v[:r], v[r:2 * r], v[-1]
        q = X @ X + lam @ (Y * Y) + c * W * W - 1.0
        hm = X @ sd - 1.0
        gq = np.concatenate([2.0 * X, 2.0 * lam * Y, [2.0 * c * W]])
        gh = np.concatenate([sd, np.zeros(r + 1)])
        a, b, d = gq @ gq, gq @ gh, gh @ gh
        det = a * d - b * b
        # solve the 2x2 normal equations in closed form
        m1 = (d * q - b * hm) / det
        m2 = (a * hm - b * q) / det
        v = v - m1 * gq - m2 * gh
    return v


# -- reconstruction -------------------------------------------------------------

def physical_from_phase(traj: Trajectory, model: OrbitModel, g_at_s0=None, u_at_s0: float = 0.0,
                        t_at_s0: float = 0.0) -> Trajectory:
    """Recover (g_i, gdot_i, u, udot) and the arclength t along a phase run.

    For full-system runs g_i = sqrt(d_i) W / Y_i directly.  For subsystem runs
    (no Y_1 column) Y_1 is reconstructed from ``g_at_s0[0]``.  The implied
    constant C = Q/W^2 - eps*u at the first sample is stored in ``meta``.
    """
    require_warped(model)
    r = model.r
    s = traj.grid
    states = traj.states
    if states.shape[1] == 2 * r:
        if g_at_s0 is None:
            raise ValueError("subsystem trajectories need g_at_s0 to recover Y_1")
        W0 = states[0, -1]
        y1 = reconstruct_y1(traj, np.sqrt(model.dims[0]) * W0 / float(np.atleast_1d(g_at_s0)[0]), s[0], model)
        states = full_vector(states, y1)
    X, Y, W = split(states)
    if np.any(W <= 0):
        raise CoordinateBreakdownError("W must be positive for the arclength reconstruction")
    if np.any(Y == 0):
        raise CoordinateBreakdownError("Y_i = 0 makes g_i = sqrt(d_i) W / Y_i undefined")
    sd = np.sqrt(model.dims)
    t = t_at_s0 + _trapezoid_cumulative(W, s, 0)
    g = sd * W[:, None] / Y
    gdot = g * X / (sd * W[:, None])
    H = X @ sd
    udot = (H - 1.0) / W
    # du/ds = udot * W = H - 1
    u = u_at_s0 + _trapezoid_cumulative(H - 1.0, s, 0)
    from .physical import pack

    x = pack(g.T, gdot.T, u, udot)
    Q = derived(states[0], model).Q
    meta = dict(traj.meta)
    meta.update(space="physical", s=s, C=float(Q / W[0] ** 2 - model.epsilon * u[0]), u0=float(u[0]))
    return Trajectory("t", t, x, list(traj.events), {}, meta)
