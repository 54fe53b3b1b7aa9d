import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soliton_flow.errors import CoordinateBreakdownError, ModelMismatchError
from soliton_flow.integrator import IntegratorConfig, Trajectory, integrate, rk4_step
from soliton_flow.model import OrbitModel, preset
from soliton_flow.phase import (Family, PhaseState, critical_points, derived, e_plus, einstein_launch,
                                einstein_residuals, full_vector, jacobian, linearize, p_point, phase_field,
                                physical_from_phase, project_einstein, reconstruct_y1, rhs_phase,
                                rhs_subsystem, sample_launches, subsystem_field, subsystem_vector,
                                write_critical_points_csv)
from soliton_flow.physical import phase_vectors

M2 = OrbitModel.warped([1, 2], [0.0, 1.0])
M3 = OrbitModel.warped([1, 2, 3], [0.0, 1.0, 2.0])

coord = st.floats(-1.5, 1.5, allow_nan=False)
vec5 = st.lists(coord, min_size=5, max_size=5).map(np.array)


def test_rhs_zero_at_origin_and_e_plus():
    assert np.all(rhs_phase(np.zeros(5), M2) == 0)
    assert np.max(np.abs(rhs_phase(e_plus(M2), M2))) <= 1e-12
    assert np.max(np.abs(rhs_phase(e_plus(M3), M3))) <= 1e-12


def test_rhs_accepts_phase_state():
    ps = PhaseState(np.array([0.1, 0.1]), np.array([0.2, 0.3]), 0.5, s=2.0)
    out = rhs_phase(ps, M2)
    assert isinstance(out, PhaseState) and out.s == 2.0
    assert np.allclose(out.to_vector(), rhs_phase(ps.to_vector(), M2))
    with pytest.raises(ModelMismatchError):
        rhs_phase(np.zeros(5), preset("example1-m1"))


def _flow(v, tau, sign, steps=50):
    f = lambda s, x: sign * rhs_phase(x, M2)
    h = tau / steps
    for k in range(steps):
        v = rk4_step(f, v, k * h, h)
    return v


def test_rhs_matches_flow_central_difference():
    v = np.array([0.1, 0.1, 0.2, 0.3, 0.5])
    f = rhs_phase(v, M2)
    errs = []
    for tau in (1e-2, 5e-3):
        fd = (_flow(v, tau, 1.0) - _flow(v, tau, -1.0)) / (2 * tau)
        errs.append(np.max(np.abs(fd - f)))
    # O(tau^2): halving tau cuts the error by about four
    assert errs[0] < 1e-4
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_derived_examples():
    m = OrbitModel.warped([1, 2], [0.0, 1.0])
    dq = derived(e_plus(m), m)
    assert (dq.G, dq.H, dq.Q, dq.Lyap) == pytest.approx((1 / 3, 1.0, 0.0, -2 / 3), abs=1e-15)
    dq = derived(np.zeros(5), m)
    assert (dq.G, dq.H, dq.Q, dq.Lyap) == (0.0, 0.0, -1.0, -1.0)
    dq = derived(p_point(m), m)
    assert (dq.G, dq.H, dq.Q, dq.Lyap) == (1.0, 1.0, 0.0, 0.0)
    assert dq.E_over_xi2 == dq.Q


@given(vec5)
def test_energy_minus_lyapunov_is_w_term(v):
    dq = derived(v, M2)
    assert dq.Q - dq.Lyap == pytest.approx(0.5 * (M2.n - 1) * v[-1] ** 2, abs=1e-12)
    assert dq.Q - dq.Lyap >= 0


def test_einstein_residual_examples():
    assert einstein_residuals(p_point(M2), M2) == (0.0, 0.0)
    q, h = einstein_residuals(e_plus(M2), M2)
    assert abs(q) < 1e-15 and abs(h) < 1e-15
    assert einstein_residuals(np.zeros(5), M2) == (-1.0, -1.0)


# -- subsystem -----------------------------------------------------------------

def test_subsystem_examples():
    assert np.max(np.abs(rhs_subsystem(subsystem_vector(e_plus(M2)), M2))) <= 1e-12
    p_hat = np.array([1.0, 0.0, 0.0, 0.0])
    assert np.all(rhs_subsystem(p_hat, M2) == 0)
    with pytest.raises(ModelMismatchError):
        rhs_subsystem(p_hat, OrbitModel.warped([2, 2], [1.0, 1.0]))


@given(vec5)
def test_subsystem_is_full_field_without_y1_row(v):
    full = rhs_phase(v, M2)
    assert np.array_equal(rhs_subsystem(subsystem_vector(v), M2), np.delete(full, 2))
    assert np.array_equal(full_vector(subsystem_vector(v), v[2]), v)


# -- reconstruction ----------------------------------------------------------------

def _short_launch(model, end=20.0, h=1e-2, seed=0):
    x0 = sample_launches(model, 1, 1e-6, seed)[0]
    return integrate(phase_field(model), x0, 0.0, IntegratorConfig(h=h, end=end), variable="s")


def test_reconstruct_y1_constant_integrand():
    states = np.tile([1.0, 0.0, 0.7, 0.0, 0.0], (30, 1))
    traj = Trajectory("s", np.linspace(0, 3, 30), states)
    assert np.all(reconstruct_y1(traj, 0.7, 0.0, M2) == 0.7)


def test_reconstruct_y1_matches_full_run():
    h = 1e-2
    full = _short_launch(M2, h=h)
    sub_run = integrate(subsystem_field(M2), subsystem_vector(full.states[0]), 0.0,
                        IntegratorConfig(h=h, end=20.0), variable="s")
    for traj in (full, sub_run):
        y1 = reconstruct_y1(traj, full.states[0, 2], 0.0, M2)
        rel = np.max(np.abs(y1 - full.states[:, 2]) / full.states[:, 2])
        assert rel <= 10 * h * h
    # anchored in the middle of the run
    k = len(full) // 2
    y1 = reconstruct_y1(full, full.states[k, 2], full.grid[k], M2)
    assert np.max(np.abs(y1 / full.states[:, 2] - 1)) <= 10 * h * h


def test_reconstruct_y1_linear_and_range_checked():
    full = _short_launch(M2, end=5.0)
    a = reconstruct_y1(full, 1.0, 0.0, M2)
    assert np.array_equal(reconstruct_y1(full, 2.0, 0.0, M2), 2.0 * a)
    with pytest.raises(ValueError):
        reconstruct_y1(full, 1.0, 6.0, M2)
    with pytest.raises(ValueError):
        reconstruct_y1(full, 1.0, 0.005, M2)


# -- critical points ---------------------------------------------------------------

def test_critical_points_two_factor_examples():
    pts = critical_points(M2)
    by_tag = {}
    for cp in pts:
        by_tag.setdefault(cp.tag, []).append(cp)
    (sub,) = by_tag["subset_rho_a{2}"]
    assert sub.coords[1] == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert sub.coords[3] ** 2 == pytest.approx(0.5, abs=1e-15)
    ep = by_tag["e_plus"][0].coords
    assert np.allclose(ep, [1 / 3, math.sqrt(2) / 3, 0, 0, math.sqrt(2 / 3)], rtol=0, atol=1e-15)
    assert by_tag["e_minus"][0].coords[-1] == -ep[-1]
    assert len(by_tag["sphere_shell"]) == 4
    assert by_tag["y1_line"][0].direction[2] == 1.0


def test_critical_points_three_factors_and_shell_samples():
    pts = critical_points(M3, shell_samples=4, seed=1)
    subsets = sorted(cp.subset for cp in pts if cp.family is Family.SUBSET_RHO_A)
    assert subsets == [(2,), (2, 3), (3,)]
    for cp in pts:
        assert np.max(np.abs(rhs_phase(cp.coords, M3))) <= 1e-12
    shell = [cp for cp in pts if cp.family is Family.SPHERE_SHELL]
    assert len(shell) == 10
    assert all(abs(np.sum(cp.coords[:3] ** 2) - 1) < 1e-14 for cp in shell)


def test_critical_points_require_circle_start():
    with pytest.raises(ModelMismatchError):
        critical_points(OrbitModel.warped([2, 2], [1.0, 1.0]))
    with pytest.raises(ModelMismatchError):
        critical_points(OrbitModel.warped([1, 1], [0.0, 1.0]))


def test_critical_points_csv(tmp_path):
    path = tmp_path / "cp.csv"
    write_critical_points_csv(critical_points(M2), path, M2)
    rows = list(csv.reader(open(path)))
    assert rows[0][:6] == ["family", "X1", "X2", "Y1", "Y2", "W"]
    assert len(rows) == 1 + len(critical_points(M2))
    assert open(path, "rb").read().count(b"\r") == 0


# -- linearization -----------------------------------------------------------------

@pytest.mark.parametrize("model", [M2, M3])
def test_spectrum_at_p(model):
    r = model.r
    _, ev = linearize(p_point(model), model)
    assert np.allclose(ev, [2.0] + [1.0] * r + [0.0] * r, atol=1e-10)


@settings(max_examples=30)
@given(vec5)
def test_jacobian_matches_central_differences(v):
    J = jacobian(v, M2)
    step = 1e-6
    for k in range(5):
        e = np.zeros(5)
        e[k] = step
        col = (rhs_phase(v + e, M2) - rhs_phase(v - e, M2)) / (2 * step)
        assert np.allclose(col, J[:, k], atol=1e-6)


def test_origin_w_direction_is_neutral():
    J = jacobian(np.zeros(5), M2)
    assert np.all(J[-1] == 0)


# -- invariants --------------------------------------------------------------------

@given(vec5, st.integers(0, 1))
def test_coordinate_faces_are_invariant(v, i):
    v = v.copy()
    v[2 + i] = 0.0
    assert rhs_phase(v, M2)[2 + i] == 0.0
    v[-1] = 0.0
    assert rhs_phase(v, M2)[-1] == 0.0


@given(vec5, st.lists(st.sampled_from([1.0, -1.0]), min_size=3, max_size=3))
def test_sign_symmetry_of_field(v, signs):
    flip = np.array([1.0, 1.0, *signs])
    assert np.array_equal(rhs_phase(flip * v, M2), flip * rhs_phase(v, M2))


def test_sign_symmetry_of_trajectories():
    x0 = sample_launches(M2, 1, 1e-6, 3)[0]
    flip = np.array([1.0, 1.0, -1.0, 1.0, -1.0])
    cfg = IntegratorConfig(h=1e-2, end=10.0)
    a = integrate(phase_field(M2), x0, 0.0, cfg)
    b = integrate(phase_field(M2), flip * x0, 0.0, cfg)
    assert np.max(np.abs(flip * a.states - b.states)) <= 1e-12


@given(vec5)
def test_normalized_mean_curvature_equation(v):
    # (H - 1)' = (H - 1)(G - 1 - eps W^2 / 2) + Q
    dq = derived(v, M2)
    dH = np.sqrt(M2.dims) @ rhs_phase(v, M2)[:2]
    expected = (dq.H - 1) * (dq.G - 1 - 0.5 * M2.epsilon * v[-1] ** 2) + dq.Q
    assert dH == pytest.approx(expected, abs=1e-12)


def test_normalized_mean_curvature_equation_along_run():
    h = 1e-2
    tr = _short_launch(M2, end=30.0, h=h)
    dq = derived(tr.states, M2)
    dH = np.gradient(dq.H, tr.grid)
    expected = (dq.H - 1) * (dq.G - 1 - 0.5 * tr.states[:, -1] ** 2) + dq.Q
    assert np.max(np.abs(dH - expected)[1:-1]) <= 10 * h * h


@given(vec5)
def test_w_over_y_equation(v):
    if np.any(np.abs(v[2:4]) < 1e-3):
        return
    d = rhs_phase(v, M2)
    for i in range(2):
        y, W = v[2 + i], v[-1]
        lhs = (d[-1] * y - W * d[2 + i]) / y ** 2
        assert lhs == pytest.approx(v[i] / math.sqrt(M2.dims[i]) * W / y, rel=1e-9, abs=1e-9)


def test_w_over_y_increasing_on_launch():
    tr = _short_launch(M2, end=40.0)
    ratio = tr.states[:, -1:] / tr.states[:, 2:4]
    # X_2 = 0 exactly at the launch point, positive afterwards
    assert np.all(tr.states[1:, :2] > 0)
    d = np.diff(ratio, axis=0)
    assert np.all(d >= -1e-12 * ratio[1:])
    clear = tr.states[1:, :2] > 1e-6
    assert np.all(d[clear] > 0)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_region_is_flow_invariant(seed):
    tr = _short_launch(M2, end=30.0, seed=seed)
    dq = derived(tr.states, M2)
    assert dq.Q[0] < 0 and dq.H[0] < 1
    assert np.max(dq.Q) < 1e-8
    assert np.max(dq.H) < 1 + 1e-8


@given(st.floats(0.05, 0.95), st.floats(0.05, 1.5))
def test_j_equation_on_einstein_face(x2, w):
    v = project_einstein(np.array([0.5, x2, 0.0, 0.0, w]), M2, iters=30)
    q, hm = einstein_residuals(v, M2)
    if abs(q) > 1e-13 or abs(hm) > 1e-13:
        return
    X, W = v[:2], v[-1]
    d = rhs_phase(v, M2)
    J = X @ X - 0.5 * W * W
    Jp = 2 * X @ d[:2] - W * d[-1]
    assert Jp == pytest.approx(2 * J * (J - 1), abs=1e-12)


def test_j_bounded_on_face_run(einstein_face_run):
    X, W = einstein_face_run.states[:, :2], einstein_face_run.states[:, -1]
    J = np.sum(X * X, axis=1) - 0.5 * W * W
    assert np.all((J >= -1e-12) & (J <= 1 + 1e-12))


# -- launches ----------------------------------------------------------------------

def test_launches_are_admissible_and_seeded():
    a = sample_launches(M3, 5, 1e-6, seed=4)
    assert np.array_equal(a, sample_launches(M3, 5, 1e-6, seed=4))
    dq = derived(a, M3)
    assert np.all(dq.Q < 0) and np.all(dq.H < 1)
    assert np.all(a[:, 3:] > 0)
    assert np.max(np.abs(a - p_point(M3))) <= 1e-6


def test_einstein_launch_on_locus():
    for c_y in (1.0, 0.0):
        v = einstein_launch(M3, 1e-3, 1.0, c_y)
        q, hm = einstein_residuals(v, M3)
        assert abs(q) < 1e-14 and abs(hm) < 1e-14
    assert np.allclose(project_einstein(e_plus(M2), M2), e_plus(M2), atol=1e-16)


# -- physical reconstruction ----------------------------------------------------------

def test_physical_from_constant_state():
    w0 = 0.4
    states = np.tile([0.1, 0.2, 0.5, 0.6, w0], (11, 1))
    s = np.linspace(2.0, 3.0, 11)
    out = physical_from_phase(Trajectory("s", s, states), M2, t_at_s0=1.5)
    assert np.allclose(out.grid, 1.5 + w0 * (s - 2.0), rtol=0, atol=1e-15)


def test_physical_from_einstein_run_has_constant_potential(einstein_run):
    h = einstein_run.meta["h"]
    out = physical_from_phase(einstein_run, M2, u_at_s0=-0.3)
    u = out.states[:, -2]
    assert np.max(np.abs(u + 0.3)) <= 10 * h * h
    assert out.meta["C"] == pytest.approx(0.3, abs=1e-9)


def test_round_trip_along_run():
    tr = _short_launch(M2, end=20.0)
    phys = physical_from_phase(tr, M2)
    assert np.max(np.abs(phase_vectors(phys.states, M2) - tr.states)) <= 1e-12
    sub = Trajectory("s", tr.grid, subsystem_vector(tr.states))
    g0 = phys.states[0, 0]
    phys_sub = physical_from_phase(sub, M2, g_at_s0=[g0])
    assert np.max(np.abs(phys_sub.states[:, 0] / phys.states[:, 0] - 1)) <= 10 * 1e-4


def test_physical_from_phase_errors():
    s = np.array([0.0, 1.0])
    with pytest.raises(CoordinateBreakdownError):
        physical_from_phase(Trajectory("s", s, np.tile([0.1, 0.2, 0.5, 0.6, -0.1], (2, 1))), M2)
    with pytest.raises(CoordinateBreakdownError):
        physical_from_phase(Trajectory("s", s, np.tile([0.1, 0.2, 0.0, 0.6, 0.1], (2, 1))), M2)
    with pytest.raises(ValueError):
        physical_from_phase(Trajectory("s", s, np.tile([0.1, 0.2, 0.6, 0.1], (2, 1))), M2)
