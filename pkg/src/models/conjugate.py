"""Conjugate posterior updates."""

import numpy as np

from src.core.distributions import (
    BetaDist, ExponentialDist, GaussianMV, NormalInverseGamma, TruncatedExponential,
)
from src.core.errors import ValidationError
from .dataset import Dataset


def posterior_normal_known_var(prior: GaussianMV, sigma2: float, y) -> GaussianMV:
    """
    Normal mean with known variance.

    Args:
        prior: One-dimensional Gaussian prior N(mu0, sigma0^2).
        sigma2: Known observation variance.
        y: One observation or an array of observations.

    Returns:
        GaussianMV: N(tau^2 * gamma, tau^2) with
        tau^2 = (1/sigma0^2 + n/sigma^2)^-1, gamma = mu0/sigma0^2 + sum(y)/sigma^2.
    """
    if prior.dim != 1:
        raise ValidationError("Known-variance update needs a one-dimensional prior")
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be positive, got {sigma2}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mu0, var0 = float(prior.mean[0]), float(prior.covariance[0, 0])
    tau2 = 1.0 / (1.0 / var0 + y.size / sigma2)
    gamma = mu0 / var0 + float(np.sum(y)) / sigma2
    return GaussianMV.scalar(tau2 * gamma, tau2)


def posterior_beta_binomial(prior: BetaDist, n: int, y: int) -> BetaDist:
    """Beta(a + y, b + n - y)."""
    if n < 0 or not 0 <= y <= n:
        raise ValidationError(f"Need 0 <= y <= n, got y={y}, n={n}")
    return BetaDist(prior.a + y, prior.b + n - y)


def posterior_nig(prior: NormalInverseGamma, data: Dataset) -> NormalInverseGamma:
    """
    Normal-inverse-gamma update for normal data with unknown mean and variance.

    Raises:
        ValidationError: Fewer than two observations.
    """
    n = data.size
    if n < 2:
        raise ValidationError(f"Need at least two observations, got {n}")
    ybar, s2 = data.mean, data.sample_variance
    lam = prior.lambda0
    mu_post = (prior.mu0 * lam + n * ybar) / (n + lam)
    b_post = (prior.b + (n - 1) * s2 / 2.0
              + n * (ybar - prior.mu0) ** 2 / (2.0 * (n / lam + 1.0)))
    return NormalInverseGamma(mu_post, n + lam, prior.a + n / 2.0, b_post)


def posterior_shifted_exp(prior: ExponentialDist, r: float, data: Dataset) -> TruncatedExponential:
    """Posterior of the location shift: exp((n r - kappa) theta) on (0, y_min)."""
    if data.size < 1:
        raise ValidationError("Need at least one observation")
    if np.any(data.y <= 0):
        raise ValidationError("Shifted-exponential observations must be positive")
    return TruncatedExponential(data.size * r - prior.kappa, float(np.min(data.y)))
