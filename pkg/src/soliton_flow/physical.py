"""Arclength-domain soliton equations.

State vectors use the interleaved layout

    (g_1, gdot_1, g_2, gdot_2, ..., g_r, gdot_r, u, udot)

which for two-summand models is exactly (z_1, ..., z_6).  The potential is
advanced with the first-order conservation law; the normal (tt) component
of the soliton equation is kept only as a residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import CoordinateBreakdownError, ModelMismatchError, SingularStateError
from .model import OrbitModel, TwoSummand, require_two_summand, require_warped
from .powerseries import Laurent


@dataclass
class PhysicalState:
    t: float
    g: np.ndarray
    gdot: np.ndarray
    u: float
    udot: float

    def to_vector(self) -> np.ndarray:
        r = len(self.g)
        x = np.empty(2 * r + 2)
        x[0:2 * r:2] = self.g
        x[1:2 * r:2] = self.gdot
        x[-2] = self.u
        x[-1] = self.udot
        return x

    @classmethod
    def from_vector(cls, t, x):
        x = np.asarray(x, dtype=float)
        r = (len(x) - 2) // 2
        return cls(float(t), x[0:2 * r:2].copy(), x[1:2 * r:2].copy(), float(x[-2]), float(x[-1]))


def unpack(x):
    """Split state vector(s) into ``(g, gdot, u, udot)`` along the last axis.

    ``g`` and ``gdot`` come back with the factor index first, so that
    ``g[i]`` is the i-th warping function over any leading sample axes.
    """
    x = np.asarray(x, dtype=float)
    r = (x.shape[-1] - 2) // 2
    g = np.moveaxis(x[..., 0:2 * r:2], -1, 0)
    gd = np.moveaxis(x[..., 1:2 * r:2], -1, 0)
    return g, gd, x[..., -2], x[..., -1]


def pack(g, gdot, u, udot) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    gdot = np.asarray(gdot, dtype=float)
    r = g.shape[0]
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape + (2 * r + 2,))
    out[..., 0:2 * r:2] = np.moveaxis(g, 0, -1)
    out[..., 1:2 * r:2] = np.moveaxis(gdot, 0, -1)
    out[..., -2] = u
    out[..., -1] = udot
    return out


# -- curvature --------------------------------------------------------------

def curvature_terms(model: OrbitModel, g):
    """Return the list of ``g_i * r_i`` where ``r_i`` is the Ricci eigenvalue.

    Works for floats, arrays and ``Laurent`` series alike.
    """
    kind = model.kind
    if isinstance(kind, TwoSummand):
        d1, d2 = kind.d1, kind.d2
        g1, g2 = g
        return [
            (d1 - 1) / g1 + (kind.A3 / d1) * g1 ** 3 / g2 ** 4,
            (kind.A2 / d2) / g2 - (2.0 * kind.A3 / d2) * g1 ** 2 / g2 ** 3,
        ]
    return [f.einstein_const / gi for f, gi in zip(kind.factors, g)]


def scalar_curvature(model: OrbitModel, g):
    kind = model.kind
    if isinstance(kind, TwoSummand):
        g1, g2 = g
        A1 = kind.d1 * (kind.d1 - 1)
        return A1 / g1 ** 2 + kind.A2 / g2 ** 2 - kind.A3 * g1 ** 2 / g2 ** 4
    return sum(f.dim * f.einstein_const / gi ** 2 for f, gi in zip(kind.factors, g))


def accelerations(model: OrbitModel, g, gd, u, ud):
    """Second derivatives ``(gddot_i, uddot)`` from the tangential equations
    and the first-order conservation law."""
    dims = [float(d) for d in model.dims]
    eps, C = model.epsilon, model.C
    L = [gdi / gi for gi, gdi in zip(g, gd)]
    trL = sum(d * Li for d, Li in zip(dims, L))
    grr = curvature_terms(model, g)
    drift = ud - trL
    gdd = [grr_i + drift * gdi + (0.5 * eps) * gi + gdi * Li
           for grr_i, gi, gdi, Li in zip(grr, g, gd, L)]
    udd = C + eps * u + ud * ud - trL * ud
    return gdd, udd


def _check_positive(g):
    for gi in g:
        if np.any(np.asarray(gi) <= 0):
            raise SingularStateError(f"warping function is non-positive: {gi}")


def rhs(x, model: OrbitModel) -> np.ndarray:
    """Vector field on the interleaved layout, for either model kind."""
    g, gd, u, ud = unpack(x)
    _check_positive(g)
    gdd, udd = accelerations(model, list(g), list(gd), u, ud)
    return pack(gd, np.array(gdd), ud, udd)


def rhs_warped(x, model: OrbitModel) -> np.ndarray:
    require_warped(model)
    return rhs(x, model)


def rhs_two_summand(z, model: OrbitModel) -> np.ndarray:
    """The six-dimensional two-summand system written out term by term."""
    require_two_summand(model)
    k = model.kind
    d1, d2, A2, A3 = k.d1, k.d2, k.A2, k.A3
    eps, C = model.epsilon, model.C
    z1, z2, z3, z4, z5, z6 = (float(v) for v in z)
    if z1 <= 0 or z3 <= 0:
        raise SingularStateError(f"z1={z1}, z3={z3} must be positive")
    return np.array([
        z2,
        -(d1 - 1) * z2 * z2 / z1 - d2 * z2 * z4 / z3 + z2 * z6
        + (d1 - 1) / z1 + (A3 / d1) * z1 ** 3 / z3 ** 4 + 0.5 * eps * z1,
        z4,
        -d1 * z2 * z4 / z1 - (d2 - 1) * z4 * z4 / z3 + z4 * z6
        + (A2 / d2) / z3 - (2 * A3 / d2) * z1 * z1 / z3 ** 3 + 0.5 * eps * z3,
        z6,
        -z6 * (d1 * z2 / z1 + d2 * z4 / z3) + z6 * z6 + eps * z5 + C,
    ])


def vector_field(model: OrbitModel):
    """Return ``f(t, x)`` suitable for the integrator."""
    if isinstance(model.kind, TwoSummand):
        return lambda t, x: rhs_two_summand(x, model)
    return lambda t, x: rhs_warped(x, model)


# -- conserved quantities ---------------------------------------------------

@dataclass
class ConservedSet:
    E: np.ndarray
    cons1_residual: np.ndarray
    cons2_residual: np.ndarray
    ham_value: np.ndarray
    xi: np.ndarray
    trL: np.ndarray
    trL2: np.ndarray
    S: np.ndarray
    uddot_tt: np.ndarray
    uddot: np.ndarray


def conserved(x, model: OrbitModel, C: float | None = None) -> ConservedSet:
    """Conservation residuals at one state or a stack of states.

    ``C`` overrides the model constant (phase-space reconstructions carry
    their own implied constant).
    """
    if isinstance(x, PhysicalState):
        x = x.to_vector()
    if C is not None and C != model.C:
        model = OrbitModel(model.kind, model.epsilon, C, model.k)
    g, gd, u, ud = unpack(x)
    dims = model.dims
    eps, C = model.epsilon, model.C
    n = float(model.n)
    gdd, udd = accelerations(model, list(g), list(gd), u, ud)
    L = gd / g
    Ldot = np.array(gdd) / g - L ** 2
    trL = np.tensordot(dims, L, axes=1)
    trL2 = np.tensordot(dims, L ** 2, axes=1)
    trLdot = np.tensordot(dims, Ldot, axes=1)
    S = scalar_curvature(model, list(g))
    xi = -ud + trL
    udd_tt = trLdot + trL2 - 0.5 * eps
    cons1 = udd_tt - udd
    cons2 = S + trL2 - xi ** 2 - eps * u + 0.5 * (n - 1) * eps - C
    Rbar = -2.0 * trLdot - trL2 - trL ** 2 + S
    ham = Rbar + ud ** 2 + eps * u + C + 0.5 * eps * (n + 1)
    return ConservedSet(C + eps * u, cons1, cons2, ham, xi, trL, trL2, S, udd_tt, udd)


def volume_density(x, model: OrbitModel):
    """Relative orbit volume ``prod g_i^{d_i}`` (unit background measure)."""
    g, _, _, _ = unpack(x)
    return np.prod(g ** model.dims.reshape((-1,) + (1,) * (g.ndim - 1)), axis=0)


# -- coordinates ------------------------------------------------------------

def phase_vectors(x, model: OrbitModel) -> np.ndarray:
    """Map physical state vector(s) to phase vectors ``(X, Y, W)``."""
    g, gd, u, ud = unpack(x)
    if np.any(g <= 0):
        raise SingularStateError("warping function is non-positive")
    sd = np.sqrt(model.dims).reshape((-1,) + (1,) * (g.ndim - 1))
    L = gd / g
    xi = -ud + np.sum(sd ** 2 * L, axis=0)
    if np.any(xi == 0):
        raise CoordinateBreakdownError("xi = -udot + trL vanishes")
    X = sd * L / xi
    Y = sd / (xi * g)
    W = 1.0 / xi
    return np.concatenate([np.moveaxis(X, 0, -1), np.moveaxis(Y, 0, -1), np.asarray(W)[..., None]], axis=-1)


def phase_from_physical(state: PhysicalState, model: OrbitModel):
    from .phase import PhaseState

    v = phase_vectors(state.to_vector(), model)
    return PhaseState.from_vector(v, s=0.0)


# -- series at the singular orbit --------------------------------------------

@dataclass
class SeriesSolution:
    """Truncated Taylor polynomials (lowest order first) for ``g_i`` and ``u``."""

    model: OrbitModel
    g: list
    u: np.ndarray
    order: int

    def state_vector(self, t) -> np.ndarray:
        g = [npoly.polyval(t, c) for c in self.g]
        gd = [npoly.polyval(t, npoly.polyder(c)) for c in self.g]
        u = npoly.polyval(t, self.u)
        ud = npoly.polyval(t, npoly.polyder(self.u))
        return pack(np.array(g), np.array(gd), u, ud)

    def state_at(self, t) -> PhysicalState:
        return PhysicalState.from_vector(t, self.state_vector(t))

    def defect(self, t) -> float:
        """Max-norm residual of the second-order equations at ``t``."""
        x = self.state_vector(t)
        g, gd, u, ud = unpack(x)
        gdd, udd = accelerations(self.model, list(g), list(gd), u, ud)
        got = [npoly.polyval(t, npoly.polyder(c, 2)) for c in self.g]
        got_u = npoly.polyval(t, npoly.polyder(self.u, 2))
        return float(max(np.max(np.abs(np.array(got) - np.array(gdd))), abs(got_u - udd)))


def _hbar_vector(model: OrbitModel, hbar) -> np.ndarray:
    h = np.atleast_1d(np.asarray(hbar, dtype=float))
    if len(h) == 1 and model.r > 2:
        h = np.repeat(h, model.r - 1)
    if len(h) != model.r - 1:
        raise ValueError(f"need {model.r - 1} initial values for g_2..g_r, got {len(h)}")
    if np.any(h <= 0):
        raise ValueError(f"hbar must be positive, got {h}")
    return h


def startup_series(model: OrbitModel, hbar, ubar: float, order: int = 6) -> SeriesSolution:
    """Taylor expansion about the singular orbit by order matching.

    Boundary data: g_1 = t + ..., g_i(0) = hbar_i, gdot_i(0) = 0, u(0) = ubar,
    udot(0) = 0.  g_1 is odd and the rest even; at level m the unknowns are
    the t^(2m+1) coefficient of g_1 and the t^(2m) coefficients of the others.
    Each level is linear in its unknowns, so a unit-probe solve is exact.
    """
    if not 2 <= int(order) <= 6 or int(order) != order:
        raise ValueError(f"series order must be an integer in [2, 6], got {order}")
    order = int(order)
    if model.r < 2:
        raise ModelMismatchError("the singular-orbit startup needs at least two factors")
    h = _hbar_vector(model, hbar)
    r = model.r
    levels = order // 2 + (order % 2)
    size = 2 * levels + 2
    top = 2 * levels + 4
    coef = np.zeros((r + 1, size))
    coef[0, 1] = 1.0
    coef[1:r, 0] = h
    coef[r, 0] = float(ubar)

    def residuals(m):
        ser = [Laurent(c, 0, top) for c in coef]
        g = ser[:r]
        gd = [s.deriv() for s in g]
        gdd, udd = accelerations(model, g, gd, ser[r], ser[r].deriv())
        out = [(g[0].deriv().deriv() - gdd[0]).coeff(2 * m - 1)]
        out += [(g[i].deriv().deriv() - gdd[i]).coeff(2 * m - 2) for i in range(1, r)]
        out.append((ser[r].deriv().deriv() - udd).coeff(2 * m - 2))
        return np.array(out)

    for m in range(1, levels + 1):
        slots = [(0, 2 * m + 1)] + [(i, 2 * m) for i in range(1, r + 1)]
        base = residuals(m)
        M = np.empty((r + 1, r + 1))
        for j, (row, col) in enumerate(slots):
            coef[row, col] = 1.0
            M[:, j] = residuals(m) - base
            coef[row, col] = 0.0
        sol = np.linalg.solve(M, -base)
        for j, (row, col) in enumerate(slots):
            coef[row, col] = sol[j]

    trunc = coef[:, :order + 1]
    return SeriesSolution(model, [trunc[i].copy() for i in range(r)], trunc[r].copy(), order)


def series_startup(model: OrbitModel, hbar, ubar: float, order: int = 6, t0: float = 1e-2) -> PhysicalState:
    if not t0 > 0:
        raise ValueError(f"t0 must be positive, got {t0}")
    return startup_series(model, hbar, ubar, order).state_at(t0)
