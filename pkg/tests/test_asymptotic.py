"""Large-sample limits of the divergence checks."""

import numpy as np
import pytest
from scipy import stats

from src.conflict import (
    CheckVariant, asymptotic_limit_p, asymptotic_limit_p_hierarchical, discrepancy,
    laplace_kl_approximation,
)
from src.core.distributions import BetaDist
from src.core.errors import UnsupportedOperationError, ValidationError
from src.divergence.order import KL
from src.models.dataset import Dataset
from tests.scenarios import (
    create_binomial_scenario, create_normal_location_scenario, create_shifted_exponential_scenario,
    create_small_nig_scenario,
)


def test_normal_location_limit_is_a_prior_tail():
    model, _ = create_normal_location_scenario()
    report = asymptotic_limit_p(model, 2.0, n_draws=50_000, seed=1)
    assert report.variant is CheckVariant.ASYMPTOTIC
    assert report.p_value == pytest.approx(2.0 * stats.norm.sf(2.0), abs=0.005)
    assert report.diagnostics["theta_star"] == [2.0]


@pytest.mark.parametrize("theta_star, expected", [(0.1, 0.2), (0.5, 1.0)])
def test_uniform_binomial_limit(theta_star, expected):
    model, _ = create_binomial_scenario()
    report = asymptotic_limit_p(model, theta_star, n_draws=50_000, seed=2)
    assert report.p_value == pytest.approx(expected, abs=0.01)


def test_jeffreys_prior_never_conflicts():
    model, _ = create_binomial_scenario()
    report = asymptotic_limit_p(model, 0.02, n_draws=20_000, prior=BetaDist(0.5, 0.5))
    assert report.p_value == 1.0


def test_limit_needs_a_regular_model():
    model, _ = create_shifted_exponential_scenario()
    with pytest.raises(UnsupportedOperationError):
        asymptotic_limit_p(model, 1.0)


def test_limit_rejects_points_outside_the_prior_support():
    model, _ = create_binomial_scenario()
    with pytest.raises(ValidationError):
        asymptotic_limit_p(model, 1.5, n_draws=100)


def test_hierarchical_limit_uses_the_conditional_prior():
    model, _ = create_small_nig_scenario()
    report = asymptotic_limit_p_hierarchical(model, [1.0, 1.0], n_draws=20_000, seed=3)
    assert report.p_value == pytest.approx(2.0 * stats.norm.sf(1.0), abs=0.01)
    assert report.diagnostics["theta1_dim"] == 1


def test_hierarchical_limit_needs_a_hierarchical_model():
    model, _ = create_normal_location_scenario()
    with pytest.raises(UnsupportedOperationError):
        asymptotic_limit_p_hierarchical(model, [0.0, 1.0], n_draws=10)


def test_laplace_approximation_matches_exact_kl_for_large_samples():
    model, _ = create_normal_location_scenario()
    n = 10_000
    exact = discrepancy(model, Dataset(np.full(n, 0.5)), KL)
    assert laplace_kl_approximation(model, 0.5, n) == pytest.approx(exact, abs=1e-3)
