"""Parametric families, the stable exponential integral and seeded generators."""

import numpy as np
import pytest
from scipy import integrate, stats

from src.core.distributions import (
    BetaBinomialDist, BetaDist, BinomialDist, GaussianMixtureApprox, GaussianMV, InverseGamma,
    NormalInverseGamma, TruncatedExponential, log_density, log_exp_integral, sample,
)
from src.core.errors import ValidationError
from src.core.rng import make_rng, replicate_rng


def test_gaussian_log_density_matches_scipy():
    dist = GaussianMV(np.array([1.0, -1.0]), np.array([[2.0, 0.3], [0.3, 0.5]]))
    x = np.array([[0.2, 0.1], [1.5, -2.0]])
    expected = stats.multivariate_normal(dist.mean, dist.covariance).logpdf(x)
    assert np.allclose(dist.log_density(x), expected)


def test_scalar_gaussian_accepts_plain_floats():
    dist = GaussianMV.scalar(0.0, 4.0)
    assert dist.log_density(1.0) == pytest.approx(stats.norm.logpdf(1.0, 0.0, 2.0))
    assert dist.log_density(np.array([0.0, 1.0])).shape == (2,)


def test_gaussian_rejects_indefinite_covariance():
    with pytest.raises(ValidationError):
        GaussianMV(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_beta_binomial_with_uniform_shape_is_uniform():
    # K = 2 and eta = 0.5 give a = b = 1
    dist = BetaBinomialDist(n=2, eta=0.5, K=2.0)
    assert dist.log_density(1) == pytest.approx(np.log(1.0 / 3.0))
    assert dist.log_density(3) == -np.inf


def test_out_of_support_densities_are_minus_infinity():
    assert BetaDist(2.0, 3.0).log_density(1.5) == -np.inf
    assert InverseGamma(2.0, 1.0).log_density(-1.0) == -np.inf
    assert TruncatedExponential(1.0, 0.5).log_density(0.7) == -np.inf
    assert NormalInverseGamma(0.0, 1.0, 2.0, 2.0).log_density(np.array([0.0, -1.0])) == -np.inf


def test_invalid_parameters_raise():
    with pytest.raises(ValidationError):
        BetaDist(-1.0, 1.0)
    with pytest.raises(ValidationError):
        BetaBinomialDist(n=5, eta=1.5, K=1.0)
    with pytest.raises(ValidationError):
        GaussianMixtureApprox(np.array([0.7, 0.7]), (GaussianMV.scalar(0, 1), GaussianMV.scalar(1, 1)))


@pytest.mark.parametrize("rate", [-3.0, 1e-10, 0.0, 2.5])
def test_log_exp_integral_matches_quadrature(rate):
    value, _ = integrate.quad(lambda x: np.exp(rate * x), 0.0, 0.8)
    assert log_exp_integral(rate, 0.8) == pytest.approx(np.log(value), rel=1e-10)


def test_truncated_exponential_samples_stay_in_support():
    dist = TruncatedExponential(rate=4.0, upper=0.7)
    draws = dist.sample(make_rng(3), 5000)
    assert np.all((draws > 0) & (draws < 0.7))
    assert np.mean(draws) > 0.35


def test_nig_marginal_of_sigma2_is_inverse_gamma():
    dist = NormalInverseGamma(0.0, 1.0, 3.0, 2.0)
    draws = dist.sample(make_rng(5), 100_000)
    assert draws.shape == (100_000, 2)
    assert np.mean(draws[:, 1]) == pytest.approx(dist.sigma2_marginal.mean, rel=0.03)


def test_mixture_density_is_weighted_sum():
    mix = GaussianMixtureApprox(np.array([0.3, 0.7]),
                                (GaussianMV.scalar(-1.0, 1.0), GaussianMV.scalar(2.0, 0.5)))
    x = 0.4
    expected = np.log(0.3 * stats.norm.pdf(x, -1.0, 1.0) + 0.7 * stats.norm.pdf(x, 2.0, np.sqrt(0.5)))
    assert mix.log_density(x) == pytest.approx(expected)
    assert mix.sample(make_rng(1), 10).shape == (10, 1)


def test_replicate_streams_are_reproducible_and_distinct():
    first = replicate_rng(5, 1, 3).standard_normal(4)
    again = replicate_rng(5, 1, 3).standard_normal(4)
    other = replicate_rng(5, 1, 4).standard_normal(4)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


def test_generic_helpers_dispatch_to_the_family():
    dist = BinomialDist(n=4, theta=0.25)
    assert log_density(dist, 1) == pytest.approx(stats.binom.logpmf(1, 4, 0.25))
    assert log_density(dist, 2.5) == -np.inf
    draws = sample(dist, make_rng(0), 1000)
    assert draws.min() >= 0 and draws.max() <= 4
    assert np.array_equal(dist.outcomes, np.arange(5))
