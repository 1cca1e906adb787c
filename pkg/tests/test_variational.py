"""Variational fits and Gaussian conditionals."""

import numpy as np
import pytest

from src.core.distributions import GaussianMixtureApprox, GaussianMV
from src.core.errors import ValidationError
from src.core.rng import make_rng
from src.divergence.order import DivergenceOrder
from src.divergence.renyi import renyi_normal_1d
from src.models.catalog import LogisticRandomEffectsModel, NormalLocationModel
from src.models.dataset import Dataset
from src.variational import (
    ElboTrace, FitConfig, draw_noise, elbo_gradient, elbo_value, fit_gaussian_vb, fit_gmm_vb,
    gaussian_conditional, kl1_star, pack, unpack,
)
from src.variational.advi import tail_average
from tests.scenarios import (
    create_bimodal_scenario, create_normal_location_scenario, create_quick_fit_config,
    create_small_nig_scenario,
)


def test_gaussian_fit_records_its_trace():
    model, data = create_normal_location_scenario()
    fit = fit_gaussian_vb(model, data, config=create_quick_fit_config(seed=3))
    assert fit.q.mean[0] == pytest.approx(1.0, abs=0.1)
    assert len(fit.trace) == fit.iterations
    assert fit.diagnostics["warm_start"] is False


def test_gaussian_fit_recovers_conjugate_posterior():
    # exact posterior N(1, 0.5)
    model, data = create_normal_location_scenario()
    fit = fit_gaussian_vb(model, data, config=FitConfig(mc_gradient_draws=32, seed=0))
    assert fit.q.mean[0] == pytest.approx(1.0, rel=1e-2)
    assert fit.q.covariance[0, 0] == pytest.approx(0.5, rel=1e-2)


def test_empty_dataset_recovers_the_prior():
    model = NormalLocationModel(mu0=0.5, sigma0sq=2.0, sigmasq=1.0)
    fit = fit_gaussian_vb(model, Dataset.empty(), config=FitConfig(mc_gradient_draws=32, seed=1))
    assert fit.q.mean[0] == pytest.approx(0.5, abs=1e-2)
    assert fit.q.covariance[0, 0] == pytest.approx(2.0, rel=1e-2)


def test_convergence_tolerance_decides_when_the_fit_stops():
    model, data = create_normal_location_scenario()
    loose = fit_gaussian_vb(model, data, config=FitConfig(max_iterations=2000, window=100,
                                                          convergence_tol=0.9))
    assert loose.converged
    assert loose.iterations == 300
    tight = fit_gaussian_vb(model, data, config=FitConfig(max_iterations=2000, window=100,
                                                          convergence_tol=1e-12))
    assert not tight.converged
    assert tight.iterations == 2000


def test_tail_average_keeps_the_trailing_partial_window():
    iterates = [np.array([float(i)]) for i in range(1, 11)]
    window_sums = [sum(iterates[0:4]), sum(iterates[4:8])]
    partial = sum(iterates[8:])
    # the final quarter needs a full window, so iterates 5..10 are averaged
    assert tail_average(window_sums, partial, 10, 4)[0] == pytest.approx(7.5)


def test_elbo_gradient_matches_central_differences():
    model, data = create_small_nig_scenario()
    params = pack(np.array([0.6, -0.2]), np.array([[0.5, 0.0], [0.2, 0.7]]))
    grad = elbo_gradient(model, data, params, 64, make_rng(7))
    noise = draw_noise(make_rng(7), 64, 2)
    h = 1e-5
    central = np.array([
        (elbo_value(model, data, params + h * step, noise) - elbo_value(model, data, params - h * step, noise))
        / (2 * h)
        for step in np.eye(params.size)])
    assert np.allclose(grad, central, rtol=1e-4, atol=1e-8)

def test_warm_start_keeps_the_optimum():
    model, data = create_normal_location_scenario()
    config = create_quick_fit_config(seed=3)
    first = fit_gaussian_vb(model, data, config=config)
    second = fit_gaussian_vb(model, data, config=config, warm_start=first.params)
    assert second.diagnostics["warm_start"] is True
    assert second.q.mean[0] == pytest.approx(first.q.mean[0], abs=0.1)


def test_same_seed_same_fit():
    model, data = create_normal_location_scenario()
    config = create_quick_fit_config(seed=5)
    a = fit_gaussian_vb(model, data, config=config)
    b = fit_gaussian_vb(model, data, config=config)
    assert np.array_equal(a.params, b.params)


def test_pack_unpack_keeps_the_cholesky_factor():
    chol = np.array([[1.5, 0.0], [0.3, 0.4]])
    mean, out, _ = unpack(pack(np.array([1.0, -1.0]), chol), 2)
    assert np.allclose(mean, [1.0, -1.0])
    assert np.allclose(out, chol)


def test_mixture_fit_only_takes_two_components():
    model, data = create_normal_location_scenario()
    with pytest.raises(ValidationError):
        fit_gmm_vb(model, data, K=3)


def test_mixture_fit_returns_a_mixture():
    model, data = create_normal_location_scenario()
    fit = fit_gmm_vb(model, data, config=create_quick_fit_config(seed=1))
    assert isinstance(fit.q, GaussianMixtureApprox)
    assert fit.q.weights.sum() == pytest.approx(1.0)
    assert float(fit.q.mean[0]) == pytest.approx(1.0, abs=0.2)


def test_gaussian_conditional():
    q = GaussianMV(np.zeros(2), np.array([[2.0, 0.5], [0.5, 1.0]]))
    means, variance, clipped = gaussian_conditional(q, 0, [1], np.array([[1.0]]))
    assert means[0] == pytest.approx(0.5)
    assert variance == pytest.approx(1.75)
    assert not clipped


def test_degenerate_conditional_is_clipped():
    rho = 1.0 - 1e-13
    q = GaussianMV(np.zeros(2), np.array([[1.0, rho], [rho, 1.0]]))
    _, variance, clipped = gaussian_conditional(q, 0, [1], np.array([[0.0]]))
    assert clipped
    assert variance == pytest.approx(1e-12)


def test_unit_conditional_divergence_with_independent_blocks():
    # u independent of (beta, log D): the conditional is the u marginal for every draw
    model = LogisticRandomEffectsModel()
    cov = np.diag([0.2, 0.3, 1.0, 0.5])
    q = GaussianMV(np.array([0.4, -0.1, -1.0, -2.0]), cov)
    theta2 = np.array([[-1.0, -2.0], [-0.5, -3.0]])
    value, clipped = kl1_star(model, 0, q, theta2, DivergenceOrder.kl())
    expected = np.mean(renyi_normal_1d(0.4, 0.2, 0.0, np.exp(theta2[:, 1]), DivergenceOrder.kl()))
    assert value == pytest.approx(expected)
    assert not clipped


def test_fit_config_validation():
    with pytest.raises(ValidationError):
        FitConfig(step_size_schedule="sgd")
    with pytest.raises(ValidationError):
        FitConfig(convergence_tol=0.0)
    assert FitConfig().with_seed(9).seed == 9


def test_trace_frame_columns():
    trace = ElboTrace()
    trace.append(-3.0, 1.0)
    trace.append(-2.5, 0.5)
    frame = trace.to_frame()
    assert list(frame.columns) == ["iteration", "elbo", "grad_norm"]
    assert frame["iteration"].tolist() == [1, 2]


def test_smoothed_trace():
    trace = ElboTrace()
    for value in range(10):
        trace.append(float(value), 0.0)
    assert np.allclose(trace.smoothed(window=5), np.arange(2.0, 8.0))
    assert len(trace.smoothed(window=50)) == 10


def test_elbo_trends_upward():
    model, data = create_normal_location_scenario()
    fit = fit_gaussian_vb(model, data, config=create_quick_fit_config(seed=2))
    smoothed = fit.trace.smoothed(window=50)
    assert smoothed[-1] >= smoothed[0]


def test_mixture_fit_recovers_bimodal_weights():
    model, data = create_bimodal_scenario()
    fit = fit_gmm_vb(model, data, config=FitConfig(seed=0))
    order = np.argsort([c.mean[0] for c in fit.q.components])
    weights = fit.q.weights[order]
    assert abs(weights[0] - 0.3) < 0.05
    assert abs(weights[1] - 0.7) < 0.05
    assert [fit.q.components[i].mean[0] for i in order] == pytest.approx([-4.0, 4.0], abs=0.2)
