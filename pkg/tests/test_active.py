from dataclasses import replace

import jax
import jax.numpy as jnp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spadesign.active import (
    AcquisitionGrid,
    SurrogateEnsemble,
    _acq_from_forces,
    acquisition,
    ensemble_predict,
    latin_designs,
    member_seeds,
    select_next,
    train_ensemble,
    uncertainty_at,
    uncertainty_profile,
    untrained_ensemble,
)
from spadesign.designvec import DesignBounds, DesignVector, is_feasible
from spadesign.errors import StateError, ValidationError
from spadesign.surrogate import SurrogateConfig, init_params, new_model, predict_force, zero_head
from spadesign.synthetic import random_family_dataset

CFG = SurrogateConfig(iterations=150, width=8, depth=2)
GRID = AcquisitionGrid((0.0, 30.0), (2.0, 6.0))


def constant_member(value: float):
    """A trained-looking member predicting ``value`` N everywhere."""
    m = zero_head(new_model(SurrogateConfig(width=4, depth=1)))
    m.params["head"]["b"] = m.params["head"]["b"].at[0].set(value)
    return replace(m, trained=True)


@pytest.fixture(scope="module")
def data():
    return random_family_dataset(4, seed=2, heights=(0.0, 30.0), pressures=np.linspace(0, 7, 6))


@pytest.fixture(scope="module")
def ens(data):
    return train_ensemble(data, CFG, n=3, seed=0)


designs = st.builds(
    DesignVector,
    st.floats(25.4, 38.1),
    st.floats(1, 3),
    st.one_of(st.none(), st.tuples(st.floats(35, 55), st.floats(5, 7))),
)


def test_hand_acquisition_value():
    m1 = jnp.array([[10.0], [14.0]])
    m2 = jnp.array([[5.0], [5.0]])
    assert float(_acq_from_forces([m1, m2])) == pytest.approx(4.0, abs=1e-12)


def test_constant_members_acquisition_and_moments():
    e = SurrogateEnsemble([constant_member(10.0), constant_member(14.0)])
    grid = AcquisitionGrid((10.0,), (3.0,))
    d1, d2 = DesignVector(30.0, 2.0), DesignVector(35.0, 1.5, (50.0, 5.0))
    assert acquisition(e, d1, d2, grid) == pytest.approx(4.0, abs=1e-12)
    mean, std = ensemble_predict(e, d1, 10.0, 3.0)
    assert mean[0] == pytest.approx(12.0, abs=1e-12)
    assert std[0] == pytest.approx(2.0, abs=1e-12)


def test_identical_members_give_zero():
    m = constant_member(7.0)
    e = SurrogateEnsemble([m, m, m])
    d = DesignVector(30.0, 2.0)
    assert acquisition(e, d, d, GRID) == 0.0
    assert ensemble_predict(e, d, 5.0, 5.0)[1][0] == 0.0
    assert uncertainty_profile(e, 50, seed=1, grid=GRID) == 0.0
    acq = select_next(e, q=2, starts=3, seed=0, grid=GRID, iters=5)
    assert acq.score == 0.0
    assert all(is_feasible(x, DesignBounds()) for x in acq.designs)


def test_single_member_has_zero_spread(ens):
    one = SurrogateEnsemble(ens.members[:1])
    assert np.all(ensemble_predict(one, DesignVector(30.0, 2.0), [0.0, 20.0], [3.0, 6.0])[1] == 0.0)


@settings(max_examples=20, deadline=None)
@given(designs, designs)
def test_acquisition_symmetric_and_nonnegative(ens, a, b):
    ab = acquisition(ens, a, b, GRID)
    assert ab >= 0.0
    assert ab == pytest.approx(acquisition(ens, b, a, GRID), rel=1e-12, abs=1e-12)


def test_mean_is_member_average(ens):
    d = DesignVector(31.0, 2.2, (48.0, 6.0))
    h, p = np.array([0.0, 15.0, 30.0]), np.array([1.0, 3.0, 6.0])
    mean, std = ensemble_predict(ens, d, h, p)
    f = np.array([predict_force(m, d, h, p) for m in ens.members])
    np.testing.assert_allclose(mean, f.mean(axis=0), rtol=0, atol=1e-12)
    np.testing.assert_allclose(std, f.std(axis=0), rtol=0, atol=1e-12)


def test_priors_are_frozen(ens):
    for m, s in zip(ens.members, member_seeds(0, 3)):
        fresh = init_params(jax.random.split(jax.random.PRNGKey(s))[0], CFG)
        for a, b in zip(jax.tree_util.tree_leaves(m.prior), jax.tree_util.tree_leaves(fresh)):
            np.testing.assert_array_equal(np.asarray(a), np.asarray(b))
        assert m.prior_scale == 1.0


def _numpy_acquisition(ens, designs, grid):
    hh, pp = grid.mesh()
    devs = []
    for d in designs:
        f = np.array([predict_force(m, d, hh, pp) for m in ens.members])
        devs.append(np.sqrt(((f - f.mean(axis=0)) ** 2).sum(axis=1)))
    return float(np.max(np.array(devs), axis=0).sum())


def test_batch_of_three_matches_direct_evaluation(ens):
    acq = select_next(ens, q=3, starts=4, seed=1, grid=GRID, iters=20)
    assert len(acq.designs) == 3
    assert all(is_feasible(d, DesignBounds()) for d in acq.designs)
    assert acq.score == pytest.approx(_numpy_acquisition(ens, acq.designs, GRID), rel=1e-10)


def test_select_improves_on_random_designs(ens):
    acq = select_next(ens, q=2, starts=6, seed=3, grid=GRID, iters=30)
    rand = latin_designs(DesignBounds(), 20, seed=5)
    pairs = [acquisition(ens, rand[i], rand[i + 1], GRID) for i in range(0, 20, 2)]
    assert acq.score >= max(pairs)


def test_collapsed_bounds_return_the_point(ens):
    b = DesignBounds(contact=(30.0, 30.0), thickness=(2.0, 2.0), ring_counts=(0,))
    acq = select_next(ens, q=2, bounds=b, starts=2, seed=0, grid=GRID, iters=5)
    assert acq.designs == (DesignVector(30.0, 2.0), DesignVector(30.0, 2.0))


def test_untrained_ensemble_raises():
    e = untrained_ensemble(CFG, 2)
    d = DesignVector(30.0, 2.0)
    with pytest.raises(StateError):
        ensemble_predict(e, d, 0.0, 1.0)
    with pytest.raises(StateError):
        acquisition(e, d, d, GRID)
    with pytest.raises(StateError):
        select_next(e, q=1, starts=1)


def test_profile_is_order_invariant(ens):
    ds = latin_designs(DesignBounds(), 30, seed=4)
    a = uncertainty_at(ens, ds, GRID)
    b = uncertainty_at(ens, ds[::-1], GRID)
    assert np.mean(a) == pytest.approx(np.mean(b), rel=1e-12)
    assert uncertainty_profile(ens, 30, seed=4, grid=GRID) == pytest.approx(np.mean(a), rel=1e-12)


def test_latin_designs_are_feasible_and_seeded():
    a = latin_designs(DesignBounds(), 40, seed=9)
    assert len(a) == 40
    assert a == latin_designs(DesignBounds(), 40, seed=9)
    assert all(is_feasible(d, DesignBounds()) for d in a)
    assert {d.n_rings for d in a} == {0, 1, 2}


def test_grid_validation():
    with pytest.raises(ValidationError):
        AcquisitionGrid((), (1.0,))
    with pytest.raises(ValidationError):
        AcquisitionGrid((2.0, 1.0), (1.0,))


def test_ensemble_save_load(tmp_path, ens):
    ens.save(tmp_path / "e")
    back = SurrogateEnsemble.load(tmp_path / "e")
    d = DesignVector(30.0, 2.0, (45.0, 5.0))
    for x, y in zip(ensemble_predict(ens, d, 10.0, 4.0), ensemble_predict(back, d, 10.0, 4.0)):
        np.testing.assert_array_equal(x, y)
    with pytest.raises(ValidationError):
        SurrogateEnsemble.load(tmp_path)
