"""
Variational posterior approximations.

This subpackage contains the full-rank Gaussian fit, the two-component
Gaussian-mixture fit and Gaussian conditioning helpers used by the
random-effects conflict checks.
"""

from src.core.distributions import GaussianMixtureApprox
from .config import WARM_START_CONFIG, ElboTrace, FitConfig
from .advi import VariationalFit, draw_noise, elbo_gradient, elbo_value, fit_gaussian_vb, pack, unpack
from .mixture import fit_gmm_vb
from .conditional import gaussian_conditional, kl1_star

__all__ = [
    'FitConfig', 'ElboTrace', 'WARM_START_CONFIG', 'VariationalFit', 'GaussianMixtureApprox',
    'fit_gaussian_vb', 'fit_gmm_vb', 'elbo_gradient', 'elbo_value', 'draw_noise', 'pack', 'unpack',
    'gaussian_conditional', 'kl1_star',
]
