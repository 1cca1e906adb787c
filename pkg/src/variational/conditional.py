"""Conditionals of a fitted Gaussian and the per-unit conditional divergence."""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.core.distributions import GaussianMV
from src.divergence.order import DivergenceOrder
from src.divergence.renyi import renyi_normal_1d

logger = logging.getLogger(__name__)

MIN_CONDITIONAL_VARIANCE = 1e-12


def gaussian_conditional(q: GaussianMV, index: int, given: Sequence[int],
                         values: np.ndarray) -> Tuple[np.ndarray, float, bool]:
    """
    Distribution of coordinate ``index`` of q given the ``given`` coordinates.

    Args:
        q: Joint Gaussian.
        index: Target coordinate.
        given: Conditioning coordinates.
        values: Conditioning values, shape (N, len(given)).

    Returns:
        tuple: (conditional means of shape (N,), conditional variance, clipped flag)
    """
    given = np.asarray(given, dtype=int)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    cov = q.covariance
    cross = cov[index, given]
    chol = linalg.cho_factor(cov[np.ix_(given, given)], lower=True)
    coef = linalg.cho_solve(chol, cross)
    means = q.mean[index] + (values - q.mean[given]) @ coef
    variance = float(cov[index, index] - cross @ coef)
    clipped = variance < MIN_CONDITIONAL_VARIANCE
    if clipped:
        logger.warning(f"Conditional variance {variance:.3g} clipped to {MIN_CONDITIONAL_VARIANCE}")
        variance = MIN_CONDITIONAL_VARIANCE
    return means, variance, clipped


def kl1_star(model, unit: int, q: GaussianMV, theta2: np.ndarray,
             order: Optional[DivergenceOrder] = None) -> Tuple[float, bool]:
    """
    Conditional divergence of a unit's random effect under a variational fit.

    For each theta2 = (beta, log D) draw, the 1-D conditional of u_unit under
    q is compared with the conditional prior N(0, D); the result is the
    average over draws.

    Args:
        model: Random-effects model exposing ``theta2_indices(n_units)``.
        unit: Row of the random effect.
        q: Gaussian fit over (u_1..u_m, beta, log D).
        theta2: Draws of (beta, log D), shape (N, 2).
        order: Divergence order, KL by default.

    Returns:
        tuple: (average divergence, clipped-variance flag)
    """
    order = order or DivergenceOrder.kl()
    n_units = q.dim - 2
    means, variance, clipped = gaussian_conditional(q, unit, model.theta2_indices(n_units), theta2)
    prior_var = np.exp(np.asarray(theta2)[:, 1])
    values = renyi_normal_1d(means, variance, 0.0, prior_var, order)
    return float(np.mean(values)), clipped
