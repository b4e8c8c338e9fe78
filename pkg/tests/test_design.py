import math

import jax.numpy as jnp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spadesign.clutch import G
from spadesign.design import (
    CoDesignConfig,
    LeverBody,
    LiftTarget,
    LiftTrajectory,
    PosteriorConfig,
    PosteriorWeights,
    Waypoint,
    co_design,
    lift_posterior,
    optimize_design,
    posterior_gradient,
    pressure_sweep,
    smooth_min,
    trajectory_rmse,
)
from spadesign.designvec import DesignBounds, DesignVector, is_feasible
from spadesign.errors import InfeasibleError, ValidationError
from spadesign.surrogate import SurrogateConfig, predict_force, train
from spadesign.synthetic import random_family_dataset

# trajectory error and smooth minimum


def test_rmse_zero_on_exact_pass():
    traj = LiftTrajectory((0.0, 2.0, 4.0, 6.0), (0.0, 10.0, 20.0, 30.0), (5, 5, 5, 5))
    assert trajectory_rmse(traj, [Waypoint(2.0, 10.0), Waypoint(6.0, 30.0)]) == 0.0


def test_rmse_normalisation():
    traj = LiftTrajectory((0.0,), (20.0,), (1.0,))
    assert trajectory_rmse(traj, [Waypoint(10.0, 20.0)], p_max=10.0) == pytest.approx(1.0)
    assert trajectory_rmse(traj, [Waypoint(0.0, 70.0)], h_max=50.0) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 60)), min_size=1, max_size=12), st.randoms())
def test_rmse_order_and_duplicate_invariance(samples, rnd):
    targets = [Waypoint(3.0, 12.0), Waypoint(6.0, 40.0)]
    base = trajectory_rmse(LiftTrajectory(*zip(*[(p, h, 0.0) for p, h in samples])), targets)
    shuffled = list(samples) * 2
    rnd.shuffle(shuffled)
    again = trajectory_rmse(LiftTrajectory(*zip(*[(p, h, 0.0) for p, h in shuffled])), targets)
    assert again == base


def test_smooth_min_closed_forms():
    assert smooth_min([2.0, 2.0, 2.0], 0.5) == pytest.approx(2.0 - math.log(3) / 0.5, rel=1e-14)
    assert smooth_min([1.0, 2.0, 3.0], 1e4) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValidationError):
        smooth_min([], 1.0)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=8), st.floats(0.01, 100))
def test_smooth_min_bounds(vals, k):
    s = smooth_min(vals, k)
    slack = 1e-9 * max(1.0, max(abs(v) for v in vals))
    assert min(vals) - math.log(len(vals)) / k - slack <= s <= min(vals) + slack


# posterior


def linear_model(c=10.0):
    """F = c p - h: the height reaching force F at pressure p is c p - F."""
    return lambda x6, mask, h, p: c * p - h


def test_posterior_with_exact_targets():
    targets = [LiftTarget(3.0, 5.0), LiftTarget(5.0, 20.0), LiftTarget(6.0, 35.0)]
    d = DesignVector(30.0, 2.0)
    res = lift_posterior(linear_model(), d, targets)
    np.testing.assert_allclose(res.heights, [25.0, 30.0, 25.0], atol=1e-9)
    assert all(res.feasible) and res.force_error < 1e-18 and res.pressure_error == 0.0
    assert res.value == pytest.approx(smooth_min(res.heights, 0.5), abs=1e-9)
    flat = lift_posterior(linear_model(), d, targets, PosteriorWeights(k_height=0.0))
    assert flat.value == pytest.approx(0.0, abs=1e-12)


def test_largest_root_is_taken():
    # F = 100 - p (h - 20)^2 reaches 19 N at p = 1 for h = 11 and h = 29
    f = lambda x6, mask, h, p: 100.0 - p * (h - 20.0) ** 2
    res = lift_posterior(f, DesignVector(30.0, 2.0), [LiftTarget(1.0, 19.0)])
    assert res.feasible == (True,)
    assert res.heights[0] == pytest.approx(29.0, abs=1e-9)


def test_unreachable_target_is_penalised_not_fatal():
    d = DesignVector(30.0, 2.0)
    res = lift_posterior(linear_model(), d, [LiftTarget(2.0, 30.0)])
    assert res.feasible == (False,)
    assert res.heights[0] == pytest.approx(0.0, abs=1e-12)
    assert res.pressure_error == pytest.approx(1.0, rel=1e-9)  # needs 3 kPa instead of 2
    assert res.value <= -PosteriorConfig().penalty


def test_error_weights_only_lower_the_posterior():
    d = DesignVector(30.0, 2.0)
    t = [LiftTarget(2.0, 30.0), LiftTarget(4.0, 10.0)]
    a = lift_posterior(linear_model(), d, t, PosteriorWeights(k_force=1.0, k_pressure=1.0)).value
    b = lift_posterior(linear_model(), d, t, PosteriorWeights(k_force=2.0, k_pressure=1.0)).value
    c = lift_posterior(linear_model(), d, t, PosteriorWeights(k_force=2.0, k_pressure=3.0)).value
    assert a > b > c


@pytest.fixture(scope="module")
def trained():
    data = random_family_dataset(6, seed=3, heights=(0.0, 20.0, 40.0), pressures=np.linspace(0, 7, 8))
    return train(data, SurrogateConfig(iterations=800, width=16, depth=2, seed=1))


def test_posterior_gradient_matches_finite_differences(trained):
    d = DesignVector(30.0, 2.0, (45.0, 6.0), (58.0, 5.0))
    f = predict_force(trained, d, [30.0, 40.0], [5.0, 6.5])
    targets = [LiftTarget(5.0, float(f[0])), LiftTarget(6.5, float(f[1]))]
    res = lift_posterior(trained, d, targets)
    assert all(res.feasible)
    g = posterior_gradient(trained, d, targets)
    x = d.as_array()
    eps = 1e-4
    for i in range(6):
        e = np.zeros(6)
        e[i] = eps
        up = lift_posterior(trained, DesignVector.from_array(x + e, 2), targets).value
        dn = lift_posterior(trained, DesignVector.from_array(x - e, 2), targets).value
        fd = (up - dn) / (2 * eps)
        assert abs(g[i] - fd) <= 1e-3 * max(abs(fd), 1e-6), (i, g[i], fd)


def test_gradient_zero_on_absent_rings(trained):
    g = posterior_gradient(trained, DesignVector(30.0, 2.0), [LiftTarget(5.0, 10.0)])
    assert np.all(g[2:] == 0.0)


# optimisation


X_STAR = np.array([30.0, 2.0, 50.0, 7.0])
S = np.array([5.0, 1.0, 10.0, 2.0])


def planted_model(x6, mask, h, p):
    a = 10.0 - jnp.sum(((x6[:4] - X_STAR) / S) ** 2)
    return a * p - h


def test_planted_optimum_is_recovered():
    b = DesignBounds(ring_counts=(1,))
    res = optimize_design(planted_model, [LiftTarget(5.0, 10.0)], bounds=b, starts=100, seed=0)
    np.testing.assert_allclose(res.best.as_array()[:4], X_STAR, atol=1e-3)
    assert res.value == pytest.approx(40.0, abs=1e-6)
    assert 1 <= len(res.top) <= 10
    assert all(is_feasible(o.design, b) for o in res.top)
    assert [o.value for o in res.top] == sorted((o.value for o in res.top), reverse=True)


def test_collapsed_bounds_return_that_design():
    b = DesignBounds(contact=(28.0, 28.0), thickness=(1.5, 1.5), ring_counts=(0,))
    res = optimize_design(linear_model(), [LiftTarget(5.0, 10.0)], bounds=b, starts=3)
    assert res.best == DesignVector(28.0, 1.5)


def test_optimum_is_always_feasible(trained):
    res = optimize_design(trained, [LiftTarget(5.0, 10.0)], starts=6, seed=2, iters=40)
    assert all(is_feasible(o.design, DesignBounds()) for o in res.top)


# co-design


def lever_model(x6, mask, h, p):
    a = (x6[0] / 25.4) ** 2 * (1 + 0.5 * x6[1])
    return jnp.maximum(0.0, a * 3.0 * p - 0.5 * h)


CD = CoDesignConfig(p_max=7.0, starts=8, polish_iters=300)
SYM = LeverBody(mass=5.0, com_arm=0.2, arm_a=0.3, arm_b=0.3)
ZERO_RING = DesignBounds(ring_counts=(0,))


def test_symmetric_body_reaches_the_closed_form_optimum():
    res = co_design(lever_model, SYM, ZERO_RING, seed=0, cfg=CD)
    j_star = SYM.mass * G * SYM.com_arm / (2 * SYM.arm_a)
    assert res.peak_force == pytest.approx(j_star, rel=1e-6)
    assert res.sweep.contact_kept
    swapped = pressure_sweep(lever_model, res.design_b, res.design_a, SYM, CD)
    assert swapped.peak_force == pytest.approx(res.peak_force, rel=1e-12)


def test_single_membrane_body():
    body = LeverBody(mass=5.0, com_arm=0.2, arm_a=0.3, arm_b=None)
    res = co_design(lever_model, body, ZERO_RING, seed=0, cfg=CD)
    assert res.design_b is None
    assert np.all(res.sweep.force_b == 0.0)
    assert res.peak_force == pytest.approx(body.moment / body.arm_a, rel=1e-6)


def test_equilibrium_balances_the_moment():
    d = DesignVector(30.0, 2.0)
    s = pressure_sweep(lever_model, d, d, SYM, CD)
    lifted = s.lifted & (s.theta < SYM.theta_max)
    assert lifted.any()
    bal = s.force_a[lifted] * SYM.arm_a + s.force_b[lifted] * SYM.arm_b
    np.testing.assert_allclose(bal, SYM.moment, rtol=1e-6)
    assert np.all(s.theta[~s.lifted] == 0.0)


def test_unliftable_body_raises():
    heavy = LeverBody(mass=1e4, com_arm=0.2, arm_a=0.3, arm_b=0.3)
    with pytest.raises(InfeasibleError):
        co_design(lever_model, heavy, ZERO_RING, cfg=CoDesignConfig(p_max=7.0, starts=3, polish_iters=20))


def test_bare_function_needs_p_max():
    with pytest.raises(ValidationError):
        pressure_sweep(lever_model, DesignVector(30.0, 2.0), None, SYM)


def test_body_validation():
    with pytest.raises(ValidationError):
        LeverBody(mass=0.0, com_arm=0.2, arm_a=0.3, arm_b=0.3)
    with pytest.raises(ValidationError):
        LeverBody(mass=1.0, com_arm=0.2, arm_a=0.3, arm_b=-0.1)
