"""Exact p-values of the shifted-exponential model."""

import numpy as np
import pytest
from scipy import integrate

from src.conflict.tail import (
    discrepancy_of_t, exact_tail_p_value, minimising_t, p_value_curve, predictive_cdf,
    predictive_density, predictive_sf, sample_t, tail_p_value_monte_carlo,
)
from src.core.errors import ValidationError
from src.core.rng import make_rng
from src.divergence.order import KL, DivergenceOrder

NUS = [2.0, 8.0, 50.0]


@pytest.mark.parametrize("nu", NUS)
def test_p_value_is_one_at_the_minimum(nu):
    t0 = minimising_t(nu)
    assert exact_tail_p_value(nu, t0, t0=t0) == 1.0


@pytest.mark.parametrize("nu", NUS)
def test_p_value_is_small_far_above_the_minimum(nu):
    t0 = minimising_t(nu)
    assert exact_tail_p_value(nu, 10.0 * t0, t0=t0) < 0.01


@pytest.mark.parametrize("nu", NUS)
def test_minimum_is_interior(nu):
    t0 = minimising_t(nu)
    floor = discrepancy_of_t(t0, nu)
    assert discrepancy_of_t(0.8 * t0, nu) > floor
    assert discrepancy_of_t(1.25 * t0, nu) > floor


@pytest.mark.parametrize("nu", NUS)
def test_predictive_distribution_is_consistent(nu):
    t = np.array([0.1, 1.0, 5.0, 40.0])
    assert np.allclose(predictive_cdf(t, nu) + predictive_sf(t, nu), 1.0)
    total, _ = integrate.quad(lambda s: float(predictive_density(s, nu)), 0.0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-7)
    mass, _ = integrate.quad(lambda s: float(predictive_density(s, nu)), 0.0, 1.0)
    assert mass == pytest.approx(float(predictive_cdf(1.0, nu)), abs=1e-8)


def test_sampled_t_follows_the_predictive_cdf():
    draws = sample_t(8.0, 50_000, make_rng(4))
    assert np.mean(draws <= 5.0) == pytest.approx(float(predictive_cdf(5.0, 8.0)), abs=0.01)


@pytest.mark.parametrize("nu, ratio", [(2.0, 0.3), (8.0, 2.5), (50.0, 1.2)])
def test_exact_agrees_with_simulation(nu, ratio):
    t_obs = ratio * minimising_t(nu)
    exact = exact_tail_p_value(nu, t_obs)
    mc, se = tail_p_value_monte_carlo(nu, t_obs, KL, M=20_000, seed=7)
    assert mc == pytest.approx(exact, abs=4.0 * max(se, 1e-3))


def test_both_sides_of_the_minimum_share_a_level():
    nu = 8.0
    t0 = minimising_t(nu)
    below = exact_tail_p_value(nu, 0.5 * t0, t0=t0)
    assert 0.0 < below < 1.0


def test_finite_orders_have_their_own_minimum():
    t0 = minimising_t(8.0, DivergenceOrder.finite(0.5))
    assert exact_tail_p_value(8.0, t0, DivergenceOrder.finite(0.5), t0=t0) == 1.0


def test_nu_must_exceed_one():
    with pytest.raises(ValidationError):
        exact_tail_p_value(1.0, 2.0)
    with pytest.raises(ValidationError):
        minimising_t(0.5)
    with pytest.raises(ValidationError):
        exact_tail_p_value(4.0, 0.0)


def test_curve_shape():
    grid = np.geomspace(1e-2, 100.0, 25)
    frame = p_value_curve([2.0, 8.0], grid)
    assert list(frame.columns) == ["nu", "t_obs", "p_value", "t0"]
    assert len(frame) == 50
    assert frame["p_value"].between(0.0, 1.0).all()
    for nu, group in frame.groupby("nu"):
        peak = group.loc[group["p_value"].idxmax()]
        assert abs(np.log(peak["t_obs"] / peak["t0"])) < np.log(grid[1] / grid[0]) + 1e-9
        assert group["t0"].nunique() == 1
