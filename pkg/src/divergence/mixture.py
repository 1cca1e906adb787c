"""Closed-form KL approximation between a Gaussian mixture and a Gaussian prior."""

import numpy as np
from scipy.special import logsumexp

from src.core.distributions import GaussianMixtureApprox, GaussianMV
from src.core.errors import UnsupportedOperationError
from .order import DivergenceOrder
from .renyi import register, renyi_gaussian

_KL = DivergenceOrder.kl()


def gaussian_kl(p: GaussianMV, q: GaussianMV) -> float:
    return renyi_gaussian(p, q, _KL)


def gmm_kl_upper_bound(q: GaussianMixtureApprox, g: GaussianMV) -> float:
    """
    Hershey–Olsen variational approximation of KL(q || g).

    Each component contributes
    w_a * log(sum_b w_b exp(-D(q_a || q_b)) / exp(-D(q_a || g))).

    Args:
        q: Mixture posterior approximation.
        g: Gaussian prior.

    Returns:
        float: Approximate KL divergence.
    """
    components = q.components
    pairwise = np.array([[gaussian_kl(qa, qb) for qb in components] for qa in components])
    to_prior = np.array([gaussian_kl(qa, g) for qa in components])
    with np.errstate(divide="ignore"):
        log_w = np.log(q.weights)
    total = 0.0
    for a, weight in enumerate(q.weights):
        if weight == 0.0:
            continue
        total += weight * (logsumexp(log_w - pairwise[a]) + to_prior[a])
    return float(total)


@register(GaussianMixtureApprox, GaussianMV)
def renyi_mixture_gaussian(q: GaussianMixtureApprox, g: GaussianMV, order: DivergenceOrder) -> float:
    if not order.is_kl:
        raise UnsupportedOperationError(
            "Mixture posteriors only have a closed-form KL; use renyi_monte_carlo for other orders")
    return gmm_kl_upper_bound(q, g)
