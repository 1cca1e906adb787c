"""
Shipped models, datasets and posterior computation.
"""

from .dataset import Dataset
from .base import GridPosterior, HierarchicalModel, ModelDefinition, PosteriorResult, PosteriorStrategy
from .conjugate import (
    posterior_beta_binomial, posterior_nig, posterior_normal_known_var, posterior_shifted_exp,
)
from .catalog import (
    MODELS, BetaBinomialModel, BinomialModel, LogisticRandomEffectsModel, NormalInverseGammaModel,
    NormalLocationModel, ShiftedExponentialModel, build_model,
)
from .fitting import fisher_info, fit_posterior, predictive_density_T, prior_predictive_sample

__all__ = [
    'Dataset', 'GridPosterior', 'HierarchicalModel', 'ModelDefinition', 'PosteriorResult',
    'PosteriorStrategy', 'posterior_beta_binomial', 'posterior_nig', 'posterior_normal_known_var',
    'posterior_shifted_exp', 'MODELS', 'BetaBinomialModel', 'BinomialModel',
    'LogisticRandomEffectsModel', 'NormalInverseGammaModel', 'NormalLocationModel',
    'ShiftedExponentialModel', 'build_model', 'fisher_info', 'fit_posterior',
    'predictive_density_T', 'prior_predictive_sample',
]
