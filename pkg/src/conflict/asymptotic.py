"""
Large-sample limits of the divergence checks.

As n grows the KL check converges to the prior probability that
g(theta) |I(theta)|^{-1/2} does not exceed its value at the true parameter,
i.e. a prior-tail probability with Jeffreys' prior as the base measure.
"""

import logging
from typing import Optional

import numpy as np

from src.core.errors import UnsupportedOperationError, ValidationError
from src.core.rng import make_rng
from src.models.base import HierarchicalModel, ModelDefinition
from .report import CheckReport, CheckVariant, binomial_std_error

logger = logging.getLogger(__name__)

DEFAULT_LIMIT_DRAWS = 100_000

# Scores within this relative band of the observed one count as ties.
SCORE_TOLERANCE = 1e-9


def _tail(scores: np.ndarray, star: float) -> float:
    return float(np.mean(scores <= star + SCORE_TOLERANCE * max(1.0, abs(star))))


def _limit_report(model, score_star, scores, theta_star, n_draws, seed, extra=None) -> CheckReport:
    finite = np.isfinite(scores)
    if not np.all(finite):
        logger.warning(f"{int(np.sum(~finite))} prior draws fell where the score is not finite")
    p = _tail(scores[finite], score_star)
    diagnostics = {"theta_star": np.atleast_1d(theta_star).tolist(), "n_draws": n_draws}
    diagnostics.update(extra or {})
    report = CheckReport(float(score_star), np.zeros(0), p, binomial_std_error(p, int(np.sum(finite))),
                         None, seed, n_draws, CheckVariant.ASYMPTOTIC, [], diagnostics, model.name)
    logger.info(f"{model.name} limiting p-value at {np.round(np.atleast_1d(theta_star), 4).tolist()}: {p:.4f}")
    return report


def asymptotic_limit_p(model: ModelDefinition, theta_star, n_draws: int = DEFAULT_LIMIT_DRAWS,
                       seed: Optional[int] = 0, prior=None) -> CheckReport:
    """
    Limiting p-value P(g(theta*) |I(theta*)|^{-1/2} >= g(theta) |I(theta)|^{-1/2}), theta ~ g.

    Args:
        model: Regular model providing Fisher information.
        theta_star: True parameter value.
        n_draws: Prior draws.
        seed: Seed of the prior draws.
        prior: Prior overriding ``model.prior``, e.g. a Jeffreys prior.

    Returns:
        CheckReport: variant "asymptotic"; ``discrepancy_obs`` holds the
        score log g(theta*) - 0.5 log |I(theta*)|.

    Raises:
        UnsupportedOperationError: The model is non-regular.
    """
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
    model.fisher_info(theta_star)
    prior = prior or model.prior
    if n_draws < 1:
        raise ValidationError(f"n_draws must be positive, got {n_draws}")
    star = float(prior.log_density(theta_star if theta_star.size > 1 or _is_vector(prior) else theta_star[0]))
    star -= 0.5 * float(model.log_fisher_det(theta_star[None, :])[0])
    if not np.isfinite(star):
        raise ValidationError(f"theta* = {theta_star.tolist()} lies outside the prior support")
    draws = np.asarray(prior.sample(make_rng(seed), n_draws), dtype=float)
    scores = np.asarray(prior.log_density(draws), dtype=float) - 0.5 * model.log_fisher_det(draws)
    return _limit_report(model, star, scores, theta_star, n_draws, seed)


def _is_vector(prior) -> bool:
    return hasattr(prior, "dim")


def asymptotic_limit_p_hierarchical(model: HierarchicalModel, theta_star,
                                    n_draws: int = DEFAULT_LIMIT_DRAWS,
                                    seed: Optional[int] = 0) -> CheckReport:
    """
    Limit of the conditional check with theta2 held at its true value.

    theta1 ~ g(theta1 | theta2*) and the Fisher information is replaced by
    its leading theta1 block I_11.
    """
    if not isinstance(model, HierarchicalModel):
        raise UnsupportedOperationError(f"{model.name} has no hierarchical prior")
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
    d1 = model.theta1_dim
    theta1_star, theta2_star = theta_star[:d1], theta_star[d1:]
    conditional = model.conditional_prior(theta2_star)

    def log_det_11(theta1):
        info = np.atleast_2d(model.fisher_info(np.concatenate([theta1, theta2_star])))
        return np.linalg.slogdet(info[:d1, :d1])[1]

    star = float(conditional.log_density(theta1_star)) - 0.5 * log_det_11(theta1_star)
    draws = np.asarray(conditional.sample(make_rng(seed), n_draws), dtype=float).reshape(n_draws, d1)
    scores = (np.asarray(conditional.log_density(draws), dtype=float)
              - 0.5 * np.array([log_det_11(row) for row in draws]))
    return _limit_report(model, star, scores, theta_star, n_draws, seed, {"theta1_dim": d1})


def laplace_kl_approximation(model: ModelDefinition, theta_hat, n_obs: int) -> float:
    """
    Large-n KL(posterior || prior) from a Gaussian posterior N(theta_hat, (n I)^{-1}):
    -log g(theta_hat) - (d/2) log(2 pi e) + 0.5 log |n I(theta_hat)|.
    """
    theta_hat = np.atleast_1d(np.asarray(theta_hat, dtype=float))
    d = theta_hat.size
    prior = model.prior
    log_g = float(prior.log_density(theta_hat if d > 1 or _is_vector(prior) else theta_hat[0]))
    log_det = float(model.log_fisher_det(theta_hat[None, :])[0]) + d * np.log(n_obs)
    return -log_g - 0.5 * d * np.log(2.0 * np.pi * np.e) + 0.5 * log_det
