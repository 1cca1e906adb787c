"""
Prior-predictive conflict checks.

Replicate i of a run draws from ``replicate_rng(seed, stage, i)``, so the
report does not depend on the worker count.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.core.errors import NumericalAbortError, UnsupportedOperationError, ValidationError
from src.core.rng import make_rng, replicate_rng
from src.divergence.monte_carlo import renyi_monte_carlo
from src.divergence.order import DivergenceOrder
from src.divergence.renyi import renyi, renyi_quadrature
from src.models.base import ModelDefinition, PosteriorResult
from src.models.dataset import Dataset
from src.models.fitting import fit_posterior, predictive_density_T, prior_predictive_sample
from src.variational.config import WARM_START_CONFIG, FitConfig
from .report import CheckReport, CheckVariant, binomial_std_error

logger = logging.getLogger(__name__)

DEFAULT_M = 1000

# Generator stages
STAGE_OBSERVED = 0
STAGE_REPLICATES = 1
STAGE_THETA2 = 2
STAGE_HELD_OUT = 3

# Share of non-finite replicate discrepancies tolerated before aborting.
MAX_NONFINITE_SHARE = 0.01

# Draws for the Monte Carlo divergence fallback.
MC_DIVERGENCE_DRAWS = 4000


def tie_band(value: float) -> float:
    """Absolute tolerance within which two discrepancies count as tied."""
    return 1e-10 * max(1.0, abs(value))


def tie_threshold(value: float) -> float:
    """Replicates at or above this count toward the tail of ``value``."""
    return value - tie_band(value)


def run_replicates(func: Callable[[int], object], M: int, workers: Optional[int] = None) -> list:
    """Evaluate ``func(i)`` for i in range(M) on a thread pool, results in index order."""
    if M < 1:
        raise ValidationError(f"M must be positive, got {M}")
    n_jobs = workers if workers else -1
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(i) for i in range(M))


def tail_probability(values: np.ndarray, observed: float,
                     weights: Optional[np.ndarray] = None) -> Tuple[float, float, List[str]]:
    """
    P(value >= observed) over replicate values, ignoring non-finite ones.

    Raises:
        NumericalAbortError: More than 1% of the values are not finite.
    """
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    flags = []
    n_bad = int(np.sum(~finite))
    if n_bad:
        share = n_bad / values.size
        logger.warning(f"{n_bad} of {values.size} replicate discrepancies were not finite")
        if share > MAX_NONFINITE_SHARE:
            raise NumericalAbortError(
                f"Too many non-finite replicate discrepancies ({share:.2%})",
                {"n_nonfinite": n_bad, "M": int(values.size)})
        flags.append("nonfinite_replicates")
    hits = values[finite] >= tie_threshold(observed)
    if weights is not None:
        w = np.asarray(weights, dtype=float)[finite]
        p = float(np.sum(w[hits]) / np.sum(w))
        return min(max(p, 0.0), 1.0), 0.0, flags
    p = float(np.mean(hits)) if hits.size else float("nan")
    return p, binomial_std_error(p, int(hits.size)), flags


def discrepancy(model: ModelDefinition, data: Dataset, order: DivergenceOrder,
                fit: Optional[PosteriorResult] = None, config: Optional[FitConfig] = None,
                rng: Optional[np.random.Generator] = None) -> float:
    """
    R_order(posterior || prior) for ``data``.

    Closed forms are used where the family pair has one; one-dimensional
    pairs without one fall back to quadrature, variational mixtures to
    Monte Carlo.

    Raises:
        OrderOutOfRangeError: The order is invalid for the family pair.
        UnsupportedOperationError: No way to evaluate the divergence.
    """
    data = model.prepare(data)
    if data.size == 0:
        return 0.0
    rng = rng or make_rng(0)
    fit = fit or fit_posterior(model, data, config, rng)
    posterior, prior = fit.representation, model.prior
    try:
        return float(renyi(posterior, prior, order))
    except UnsupportedOperationError:
        if hasattr(posterior, "support") and getattr(posterior, "dim", 1) == 1:
            return renyi_quadrature(posterior, prior, order)
        if order.is_mr or not hasattr(posterior, "sample"):
            raise
    estimate = renyi_monte_carlo(
        lambda draws: posterior.log_density(draws) - prior.log_density(draws),
        lambda generator, size: posterior.sample(generator, size),
        order, MC_DIVERGENCE_DRAWS, rng)
    logger.info(f"Monte Carlo divergence {estimate.estimate:.4f} (s.e. {estimate.std_error:.4f})")
    return estimate.estimate


def _replicate_config(observed: PosteriorResult, config: Optional[FitConfig]) -> Optional[FitConfig]:
    return WARM_START_CONFIG if observed.kind == "variational" else config


def conflict_p_value(model: ModelDefinition, data_obs: Dataset, order: DivergenceOrder,
                     M: int = DEFAULT_M, seed: Optional[int] = 0, workers: Optional[int] = None,
                     config: Optional[FitConfig] = None) -> CheckReport:
    """
    Prior-predictive p-value P(R(Y) >= R(y_obs)).

    Discrete models whose sufficient statistic has at most 10^4 values are
    enumerated exactly; ``M`` is then ignored and the report carries the
    outcome masses as replicate weights.

    Args:
        model: Shipped model with a proper prior.
        data_obs: Observed dataset; also the shape template for replicates.
        order: Divergence order.
        M: Number of prior-predictive replicates.
        seed: Master seed.
        workers: Thread count; all available cores when None.
        config: Variational settings for the observed-data fit.

    Returns:
        CheckReport: variant "plain".
    """
    data = model.prepare(data_obs)
    config = config or FitConfig(seed=seed or 0)
    observed = fit_posterior(model, data, config, replicate_rng(seed, STAGE_OBSERVED, 0))
    d_obs = discrepancy(model, data, order, fit=observed, rng=replicate_rng(seed, STAGE_OBSERVED, 1))
    flags = list(observed.flags)
    diagnostics = {"observed_fit": observed.diagnostics}

    outcomes = model.enumerate_outcomes(data)
    if outcomes is not None:
        datasets, log_mass = outcomes
        values = np.array([discrepancy(model, d, order) for d in datasets])
        weights = np.exp(np.asarray(log_mass) - np.max(log_mass))
        weights /= weights.sum()
        p, std_error, tail_flags = tail_probability(values, d_obs, weights)
        logger.info(f"{model.name}: enumerated {len(datasets)} outcomes, p = {p:.4f}")
        return CheckReport(d_obs, values, p, std_error, order, seed, len(datasets), CheckVariant.PLAIN,
                           flags + ["enumeration"] + tail_flags, diagnostics, model.name,
                           replicate_weights=weights)

    replicate_config = _replicate_config(observed, config)

    def replicate(i: int) -> Tuple[float, bool]:
        rng = replicate_rng(seed, STAGE_REPLICATES, i)
        y = prior_predictive_sample(model, data, rng)
        fit = fit_posterior(model, y, replicate_config, rng, warm_start=observed.state)
        return discrepancy(model, y, order, fit=fit, rng=rng), fit.converged

    results = run_replicates(replicate, M, workers)
    values = np.array([r[0] for r in results])
    n_unconverged = sum(not r[1] for r in results)
    p, std_error, tail_flags = tail_probability(values, d_obs)
    flags += tail_flags
    if n_unconverged:
        flags.append("non_converged_fit")
        diagnostics["non_converged_replicates"] = n_unconverged
    logger.info(f"{model.name} {order} check: p = {p:.4f} (s.e. {std_error:.4f}, M={M})")
    return CheckReport(d_obs, values, p, std_error, order, seed, M, CheckVariant.PLAIN,
                       sorted(set(flags), key=flags.index), diagnostics, model.name)


def em_p_value(model: ModelDefinition, data_obs: Dataset, M: int = DEFAULT_M,
               seed: Optional[int] = 0, workers: Optional[int] = None) -> CheckReport:
    """
    Evans-Moshonov check P(p(T) <= p(t_obs)) for the sufficient statistic T.

    The report's discrepancies are -log p(t), so the tail convention matches
    the divergence checks.

    Raises:
        UnsupportedOperationError: The model has no closed-form predictive for T.
    """
    data = model.prepare(data_obs)
    d_obs = -predictive_density_T(model, model.sufficient_statistic(data), data)

    outcomes = model.enumerate_outcomes(data)
    if outcomes is not None:
        datasets, log_mass = outcomes
        values = np.array([-predictive_density_T(model, model.sufficient_statistic(d), data)
                           for d in datasets])
        weights = np.exp(np.asarray(log_mass) - np.max(log_mass))
        weights /= weights.sum()
        p, std_error, flags = tail_probability(values, d_obs, weights)
        return CheckReport(d_obs, values, p, std_error, None, seed, len(datasets), CheckVariant.EM,
                           ["enumeration"] + flags, {}, model.name, replicate_weights=weights)

    def replicate(i: int) -> float:
        y = prior_predictive_sample(model, data, replicate_rng(seed, STAGE_REPLICATES, i))
        return -predictive_density_T(model, model.sufficient_statistic(y), data)

    values = np.array(run_replicates(replicate, M, workers))
    p, std_error, flags = tail_probability(values, d_obs)
    logger.info(f"{model.name} Evans-Moshonov check: p = {p:.4f} (s.e. {std_error:.4f}, M={M})")
    return CheckReport(d_obs, values, p, std_error, None, seed, M, CheckVariant.EM, flags, {}, model.name)


def order_sweep(model: ModelDefinition, data_obs: Dataset, orders: Sequence[DivergenceOrder],
                M: int = DEFAULT_M, seed: Optional[int] = 0,
                workers: Optional[int] = None) -> List[CheckReport]:
    """One plain check per order, all on the same replicate streams."""
    return [conflict_p_value(model, data_obs, order, M, seed, workers) for order in orders]
