"""
Posterior computation and prior-predictive operations over any shipped model.
"""

import logging
from typing import Optional

import numpy as np

from src.core.errors import ValidationError
from src.core.rng import make_rng
from src.variational.advi import fit_gaussian_vb
from src.variational.config import FitConfig
from src.variational.mixture import fit_gmm_vb
from .base import ModelDefinition, PosteriorResult, PosteriorStrategy
from .dataset import Dataset

logger = logging.getLogger(__name__)


def fit_posterior(model: ModelDefinition, data: Dataset, config: Optional[FitConfig] = None,
                  rng: Optional[np.random.Generator] = None,
                  warm_start: Optional[np.ndarray] = None,
                  grid_points: Optional[int] = None) -> PosteriorResult:
    """
    Compute the posterior with the model's strategy.

    Args:
        model: Shipped model.
        data: Observed dataset; validated and canonicalised here.
        config: Variational settings, ignored by the other strategies.
        rng: Generator for stochastic fits.
        warm_start: Packed variational parameters of an earlier fit.
        grid_points: Points per axis for grid posteriors.

    Returns:
        PosteriorResult: ``kind`` is "exact", "grid" or "variational".
    """
    data = model.prepare(data)
    strategy = model.posterior_strategy
    logger.debug(f"{model.name}: {strategy.value} posterior for {data.size} observations")
    if strategy == PosteriorStrategy.CONJUGATE:
        representation = model.prior if data.size == 0 else model.posterior(data)
        return PosteriorResult(representation, "exact")
    if strategy == PosteriorStrategy.GRID:
        grid = model.grid_posterior(data, grid_points)
        return PosteriorResult(grid, "grid", {"grid_points": int(round(grid.points.shape[0] ** (1.0 / grid.dim)))})

    config = config or FitConfig()
    rng = rng or make_rng(config.seed)
    if model.variational_family == "mixture":
        fit = fit_gmm_vb(model, data, config=config, warm_start=warm_start, rng=rng)
    else:
        fit = fit_gaussian_vb(model, data, config=config, warm_start=warm_start, rng=rng)
    diagnostics = dict(fit.diagnostics)
    return PosteriorResult(fit.q, "variational", diagnostics, fit.trace, fit.params)


def prior_predictive_sample(model: ModelDefinition, template: Dataset,
                            rng: np.random.Generator) -> Dataset:
    """Draw theta from the prior, then data shaped like ``template``."""
    theta = np.atleast_1d(model.sample_prior(rng, template))
    return model.simulate(theta, template, rng)


def predictive_density_T(model: ModelDefinition, t, template: Optional[Dataset] = None) -> float:
    """
    Log prior-predictive density (or mass) of the sufficient statistic at ``t``.

    ``template`` supplies the sample size; one observation when omitted.

    Raises:
        UnsupportedOperationError: The model has no closed form.
    """
    if template is None:
        template = Dataset(np.zeros(1))
    return model.predictive_log_density(t, template)


def fisher_info(model: ModelDefinition, theta) -> np.ndarray:
    """
    Per-observation Fisher information at ``theta``.

    Raises:
        UnsupportedOperationError: The model is non-regular.
        ValidationError: The model returned an asymmetric matrix.
    """
    info = np.atleast_2d(np.asarray(model.fisher_info(theta), dtype=float))
    if not np.allclose(info, info.T, rtol=1e-8, atol=1e-10):
        raise ValidationError(f"{model.name}: Fisher information at {theta} is not symmetric")
    return info
