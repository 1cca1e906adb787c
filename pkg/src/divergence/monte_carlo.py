"""Monte Carlo divergence estimators driven by posterior draws."""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from src.core.errors import NumericalAbortError, UnsupportedOperationError, ValidationError
from .order import DivergenceOrder

logger = logging.getLogger(__name__)

# Share of non-finite log-ratio values tolerated before aborting.
MAX_NONFINITE_SHARE = 1e-3


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    std_error: float
    n_draws: int
    n_nonfinite: int = 0


def _evaluate(log_ratio: Callable, sampler: Callable, n_draws: int, rng: np.random.Generator):
    if n_draws < 1:
        raise ValidationError(f"n_draws must be positive, got {n_draws}")
    draws = sampler(rng, n_draws)
    values = np.asarray(log_ratio(draws), dtype=float).reshape(n_draws)
    finite = np.isfinite(values)
    n_bad = int(np.sum(~finite))
    if n_bad:
        share = n_bad / n_draws
        logger.warning(f"{n_bad} of {n_draws} log-ratio values were not finite")
        if share > MAX_NONFINITE_SHARE:
            raise NumericalAbortError(
                f"Too many non-finite log-ratio values ({share:.2%})",
                {"n_nonfinite": n_bad, "n_draws": n_draws})
    return values[finite], n_bad


def kl_monte_carlo(log_ratio: Callable, sampler: Callable, n_draws: int,
                   rng: np.random.Generator) -> MonteCarloEstimate:
    """
    Estimate E_p[log p/q] from draws of p.

    Args:
        log_ratio: Vectorised map from draws to log p(x) - log q(x).
        sampler: ``sampler(rng, size)`` drawing from p.
        n_draws: Number of draws.
        rng: Generator.

    Returns:
        MonteCarloEstimate: Mean with its standard error.
    """
    values, n_bad = _evaluate(log_ratio, sampler, n_draws, rng)
    std_error = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return MonteCarloEstimate(float(np.mean(values)), std_error, n_draws, n_bad)


def renyi_monte_carlo(log_ratio: Callable, sampler: Callable, order: DivergenceOrder,
                      n_draws: int, rng: np.random.Generator) -> MonteCarloEstimate:
    """Finite-order version: (1/(alpha-1)) log E_p[(p/q)^(alpha-1)], delta-method error."""
    if order.is_kl:
        return kl_monte_carlo(log_ratio, sampler, n_draws, rng)
    if order.is_mr:
        raise UnsupportedOperationError("MR cannot be estimated by averaging draws")
    values, n_bad = _evaluate(log_ratio, sampler, n_draws, rng)
    scaled = (order.alpha - 1.0) * values
    log_mean = logsumexp(scaled) - np.log(values.size)
    rel = np.exp(scaled - log_mean)
    std_error = float(np.std(rel, ddof=1) / np.sqrt(values.size) / abs(order.alpha - 1.0))
    return MonteCarloEstimate(float(log_mean / (order.alpha - 1.0)), std_error, n_draws, n_bad)
