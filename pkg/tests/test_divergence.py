"""Closed-form Rényi divergences, their limits and the numerical fallbacks."""

import numpy as np
import pytest

from src.core.distributions import (
    BetaDist, ExponentialDist, GaussianMixtureApprox, GaussianMV, InverseGamma, NormalInverseGamma,
    TruncatedExponential, log_exp_integral,
)
from src.core.errors import OrderOutOfRangeError, UnsupportedOperationError, ValidationError
from src.core.rng import make_rng
from src.divergence import (
    KL, MR, DivergenceOrder, gmm_kl_upper_bound, kl_monte_carlo, relative_belief_norm, renyi,
    renyi_monte_carlo, renyi_normal_1d, renyi_quadrature,
)


def test_order_parsing():
    assert DivergenceOrder.parse("KL") == KL
    assert DivergenceOrder.parse("mr") == MR
    assert DivergenceOrder.parse("alpha:1") == KL
    assert DivergenceOrder.parse("alpha:0.5").alpha == 0.5
    assert str(DivergenceOrder.finite(2.5)) == "alpha:2.5"
    for bad in ("alpha:-2", "alpha:x", "renyi"):
        with pytest.raises(ValidationError):
            DivergenceOrder.parse(bad)


def test_beta_kl_against_uniform_prior():
    assert renyi(BetaDist(2.0, 1.0), BetaDist(1.0, 1.0), KL) == pytest.approx(np.log(2.0) - 0.5)


def test_gaussian_mr_closed_form():
    value = renyi(GaussianMV.scalar(0.0, 0.5), GaussianMV.scalar(0.0, 1.0), MR)
    assert value == pytest.approx(0.5 * np.log(2.0))


def test_gaussian_mr_is_unbounded_when_posterior_is_wider():
    assert renyi(GaussianMV.scalar(0.0, 2.0), GaussianMV.scalar(0.0, 1.0), MR) == np.inf


def test_gaussian_order_outside_validity_region():
    with pytest.raises(OrderOutOfRangeError) as info:
        renyi(GaussianMV.scalar(0.0, 1.0), GaussianMV.scalar(0.0, 0.1), DivergenceOrder.finite(2.0))
    assert info.value.alpha == 2.0


def test_divergence_is_non_decreasing_in_order():
    p, q = BetaDist(8.0, 4.0), BetaDist(2.0, 2.0)
    orders = [DivergenceOrder.finite(0.5), KL, DivergenceOrder.finite(2.0),
              DivergenceOrder.finite(5.0), MR]
    values = [renyi(p, q, order) for order in orders]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_finite_order_approaches_kl():
    p, q = BetaDist(5.0, 3.0), BetaDist(1.0, 2.0)
    near = renyi(p, q, DivergenceOrder.finite(1.0 + 1e-6))
    assert near == pytest.approx(renyi(p, q, KL), rel=1e-4)


QUADRATURE_PAIRS = {
    "beta": (BetaDist(6.0, 3.0), BetaDist(2.0, 2.0)),
    "shifted-exponential": (TruncatedExponential(rate=4.0, upper=0.7), ExponentialDist(1.0)),
    "normal": (GaussianMV.scalar(0.7, 0.4), GaussianMV.scalar(0.0, 1.0)),
    "inverse-gamma": (InverseGamma(5.0, 6.0), InverseGamma(2.0, 2.0)),
}


@pytest.mark.parametrize("pair", sorted(QUADRATURE_PAIRS))
@pytest.mark.parametrize("order", [KL, DivergenceOrder.finite(0.5), DivergenceOrder.finite(2.0), MR],
                         ids=str)
def test_closed_form_matches_quadrature(pair, order):
    p, q = QUADRATURE_PAIRS[pair]
    assert renyi_quadrature(p, q, order) == pytest.approx(renyi(p, q, order), rel=1e-8)


def test_quadrature_rejects_multivariate_posteriors():
    p = GaussianMV(np.zeros(2), np.eye(2))
    with pytest.raises(UnsupportedOperationError):
        renyi_quadrature(p, p, KL)


def test_shifted_exponential_mr_is_attained_at_the_minimum_observation():
    posterior, prior = TruncatedExponential(rate=4.0, upper=0.7), ExponentialDist(1.0)
    # log ratio 5 x - log Z increases up to x = 0.7
    expected = 5.0 * 0.7 - log_exp_integral(4.0, 0.7)
    assert renyi(posterior, prior, MR) == pytest.approx(expected)


def test_nig_kl_matches_monte_carlo():
    p, q = NormalInverseGamma(0.75, 4.0, 3.5, 3.375), NormalInverseGamma(0.0, 1.0, 2.0, 2.0)
    estimate = kl_monte_carlo(lambda x: p.log_density(x) - q.log_density(x),
                              lambda rng, size: p.sample(rng, size), 200_000, make_rng(2))
    assert renyi(p, q, KL) == pytest.approx(estimate.estimate, abs=4 * estimate.std_error + 1e-3)


def test_nig_finite_order_matches_monte_carlo():
    p, q = NormalInverseGamma(0.75, 4.0, 3.5, 3.375), NormalInverseGamma(0.0, 1.0, 2.0, 2.0)
    order = DivergenceOrder.finite(0.5)
    estimate = renyi_monte_carlo(lambda x: p.log_density(x) - q.log_density(x),
                                 lambda rng, size: p.sample(rng, size), order, 200_000, make_rng(4))
    assert renyi(p, q, order) == pytest.approx(estimate.estimate, abs=4 * estimate.std_error + 1e-3)


def test_monte_carlo_refuses_mr():
    with pytest.raises(UnsupportedOperationError):
        renyi_monte_carlo(lambda x: x, lambda rng, size: rng.standard_normal(size), MR, 10, make_rng(0))


def test_vectorised_normal_divergence_matches_gaussian_pair():
    means, variances = np.array([0.0, 1.0, -2.0]), np.array([0.5, 0.2, 0.9])
    for order in (KL, DivergenceOrder.finite(0.7), MR):
        values = renyi_normal_1d(means, variances, 0.3, 1.0, order)
        expected = [renyi(GaussianMV.scalar(m, v), GaussianMV.scalar(0.3, 1.0), order)
                    for m, v in zip(means, variances)]
        assert np.allclose(values, expected)


def test_relative_belief_norm_at_zero_is_exp_kl():
    p, q = BetaDist(3.0, 2.0), BetaDist(1.0, 1.0)
    assert relative_belief_norm(p, q, 0.0) == pytest.approx(np.exp(renyi(p, q, KL)))
    assert relative_belief_norm(p, q, 40.0) <= np.exp(renyi(p, q, MR)) + 1e-9


def test_mixture_of_identical_components_reduces_to_gaussian_kl():
    component = GaussianMV(np.array([0.5, -0.2]), np.array([[0.3, 0.1], [0.1, 0.4]]))
    prior = GaussianMV(np.zeros(2), np.eye(2))
    mixture = GaussianMixtureApprox(np.array([0.5, 0.5]), (component, component))
    assert gmm_kl_upper_bound(mixture, prior) == pytest.approx(renyi(component, prior, KL))
    assert renyi(mixture, prior, KL) == pytest.approx(renyi(component, prior, KL))
    with pytest.raises(UnsupportedOperationError):
        renyi(mixture, prior, DivergenceOrder.finite(2.0))


def test_unsupported_family_pair():
    with pytest.raises(UnsupportedOperationError):
        renyi(BetaDist(1.0, 1.0), GaussianMV.scalar(0.0, 1.0), KL)


HERSHEY_OLSEN_FIXTURES = {
    "separated-1d": (
        GaussianMixtureApprox(np.array([0.3, 0.7]),
                              (GaussianMV.scalar(-4.0, 1.0), GaussianMV.scalar(4.0, 1.0))),
        GaussianMV.scalar(0.0, 25.0)),
    "separated-2d": (
        GaussianMixtureApprox(np.array([0.5, 0.5]),
                              (GaussianMV(np.array([-7.1, 7.9]), np.array([[0.04, 0.01], [0.01, 0.05]])),
                               GaussianMV(np.array([-6.0, 9.0]), np.array([[0.03, -0.01], [-0.01, 0.06]])))),
        GaussianMV(np.array([-7.4, 7.9]), 0.25 * np.eye(2))),
    "coinciding": (
        GaussianMixtureApprox(np.array([0.4, 0.6]),
                              (GaussianMV(np.array([0.5, -0.2]), np.array([[0.3, 0.1], [0.1, 0.4]])),) * 2),
        GaussianMV(np.zeros(2), np.eye(2))),
}


@pytest.mark.parametrize("fixture", sorted(HERSHEY_OLSEN_FIXTURES))
def test_mixture_bound_is_not_below_monte_carlo_kl(fixture):
    mixture, prior = HERSHEY_OLSEN_FIXTURES[fixture]
    estimate = kl_monte_carlo(lambda x: mixture.log_density(x) - prior.log_density(x),
                              lambda rng, size: mixture.sample(rng, size), 200_000, make_rng(8))
    assert gmm_kl_upper_bound(mixture, prior) >= estimate.estimate - 3 * estimate.std_error
