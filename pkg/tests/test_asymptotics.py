import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soliton_flow.asymptotics import (ModelForm, arclength, check_lambda_limits, check_scaling_laws,
                                      einstein_convergence, estimate_sigma, fit_cone_slopes, tail_mask)
from soliton_flow.integrator import Trajectory
from soliton_flow.model import OrbitModel
from soliton_flow.phase import e_plus
from soliton_flow.physical import pack
from soliton_flow.runs import to_physical

CIRCLE = OrbitModel.warped([1, 2], [0.0, 1.0])


def phase_traj(s, X, Y, W):
    """Phase trajectory from columns; X and Y have the factor axis last."""
    return Trajectory("s", np.asarray(s, dtype=float), np.column_stack([X, Y, W]))


def cone_traj(t, g):
    g = np.atleast_2d(g)
    x = pack(g, np.gradient(g, t, axis=1), -t, -np.ones_like(t))
    return Trajectory("t", t, x)


@pytest.mark.parametrize("n,expected", [(60, 50), (100, 50), (1000, 200), (1001, 201)])
def test_tail_mask_sizes(n, expected):
    mask = tail_mask(np.arange(n))
    assert mask.sum() == expected
    assert mask[-expected:].all()


def test_tail_mask_too_short():
    with pytest.raises(ValueError):
        tail_mask(np.arange(49))


@given(st.floats(0.1, 10), st.floats(-5, 5), st.floats(0.1, 10), st.floats(0.5, 5))
def test_cone_fit_exact_on_linear_profiles(a1, b1, a2, b2):
    t = np.linspace(1.0, 20.0, 400)
    fits = fit_cone_slopes(cone_traj(t, [a1 * t + b1 + 20, a2 * t + b2]))
    assert fits[0].params == pytest.approx([a1, b1 + 20], abs=1e-9)
    assert fits[1].params == pytest.approx([a2, b2], abs=1e-9)
    assert all(f.ok and f.model_form is ModelForm.LINEAR for f in fits)


def test_cone_fit_rejects_exponential():
    t = np.linspace(0.0, 30.0, 1000)
    fits = fit_cone_slopes(cone_traj(t, np.exp(t)))
    assert not fits[0].ok and fits[0].deviation > 1e-2


def test_cone_fit_on_example1(ex1_run):
    fits = fit_cone_slopes(ex1_run)
    assert all(f.ok for f in fits)
    assert all(f.params[0] > 0 for f in fits)


def test_cone_fit_on_einstein_run(einstein_run, circle_model):
    # along E+ the factors grow exponentially, so no cone fits
    fits = fit_cone_slopes(to_physical(einstein_run, circle_model))
    assert not any(f.ok for f in fits)


def test_lambda_limit_exact():
    s = np.linspace(1.0, 100.0, 500)
    W = 1.0 / np.sqrt(CIRCLE.epsilon * s)
    target = 0.5 * CIRCLE.epsilon * np.sqrt(CIRCLE.dims)
    X = np.outer(W ** 2, target)
    fits = check_lambda_limits(phase_traj(s, X, np.full((500, 2), 0.1), W), CIRCLE)
    assert [f.quantity for f in fits] == ["Lambda1", "Lambda2"]
    assert all(f.ok and f.deviation < 1e-12 for f in fits)
    fits = check_lambda_limits(phase_traj(s, 2 * X, np.full((500, 2), 0.1), W), CIRCLE)
    assert not any(f.ok for f in fits)
    assert fits[0].deviation == pytest.approx(1.0)


def test_arclength_constant_W():
    s = np.linspace(0.0, 4.0, 41)
    tr = phase_traj(s, np.zeros((41, 2)), np.ones((41, 2)), np.full(41, 0.5))
    assert arclength(tr, t_at_s0=1.0) == pytest.approx(1.0 + 0.5 * s)


def test_scaling_laws_exact_profile():
    eps = CIRCLE.epsilon
    s = np.linspace(10.0, 1e4, 2000)
    W = 1.0 / np.sqrt(eps * s)
    t = 2.0 * np.sqrt(s / eps)
    X = np.outer(W ** 2, [0.3, 0.4])
    fits = {f.quantity: f for f in check_scaling_laws(phase_traj(s, X, np.ones((2000, 2)), W), CIRCLE, t=t)}
    for name in ("W_sqrt_eps_s", "s_over_eps_t2_4", "inv_W2_slope", "sqrt_s_slope"):
        assert fits[name].ok and fits[name].deviation < 1e-9, name
    # G / W^4 = 0.3^2 + 0.4^2
    assert fits["G_over_W4"].params == pytest.approx([0.25, 0.25])


def test_scaling_laws_detect_wrong_rate():
    s = np.linspace(10.0, 1e4, 2000)
    W = 1.0 / s
    fits = {f.quantity: f for f in check_scaling_laws(phase_traj(s, np.zeros((2000, 2)), np.ones((2000, 2)), W),
                                                      CIRCLE)}
    assert not fits["W_sqrt_eps_s"].ok
    assert not fits["inv_W2_slope"].ok


def test_scaling_laws_need_positive_window():
    s = np.linspace(-10.0, -1.0, 100)
    with pytest.raises(ValueError):
        check_scaling_laws(phase_traj(s, np.zeros((100, 2)), np.ones((100, 2)), np.ones(100)), CIRCLE)


def test_einstein_convergence_at_fixed_point():
    s = np.linspace(0.0, 10.0, 100)
    tr = Trajectory("s", s, np.tile(e_plus(CIRCLE), (100, 1)))
    fits = einstein_convergence(tr, CIRCLE)
    # Y = 0 on E+, so only the distance is reported
    assert len(fits) == 1
    assert fits[0].quantity == "distance_to_E_plus" and fits[0].deviation == 0.0


def test_sigma_plateau_and_divergence():
    s = np.linspace(0.0, 100.0, 1000)
    W = np.full(1000, 0.5)
    plateau = estimate_sigma(phase_traj(s, np.zeros((1000, 2)), np.ones((1000, 2)), W), 1)
    assert plateau.details["monotone"] and not plateau.details["divergent"]
    assert plateau.details["final"] == 0.5
    Y = np.column_stack([1.0 / (1.0 + s), np.ones(1000)])
    grow = estimate_sigma(phase_traj(s, np.zeros((1000, 2)), Y, W), 1)
    assert grow.details["divergent"] and grow.details["monotone"]
    assert grow.details["tail_exponent"] == pytest.approx(1.0, abs=0.05)
    # the second factor still has a constant ratio
    assert not estimate_sigma(phase_traj(s, np.zeros((1000, 2)), Y, W), 2).details["divergent"]


def test_sigma_flags_decrease():
    s = np.linspace(0.0, 10.0, 200)
    Y = np.column_stack([1.0 + s, np.ones(200)])
    fit = estimate_sigma(phase_traj(s, np.zeros((200, 2)), Y, np.ones(200)), 1)
    assert not fit.details["monotone"]


def test_sigma_on_launch(p_launch_batch):
    # W/Y_i = g_i/sqrt(d_i) grows like t, i.e. like sqrt(s), on a conical end
    tr = p_launch_batch.member(0)
    for i in (1, 2):
        fit = estimate_sigma(tr, i)
        assert fit.details["monotone"] and fit.details["divergent"]
        assert fit.details["tail_exponent"] == pytest.approx(0.5, abs=0.01)
