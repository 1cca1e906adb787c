"""
Rényi divergences between posterior and prior.

This subpackage contains the order specifier, closed forms for every
supported family pair, the Gaussian-mixture KL approximation and Monte Carlo
estimators.
"""

from .order import KL, MR, DivergenceOrder, OrderKind
from .renyi import (
    relative_belief, relative_belief_norm, renyi, renyi_beta, renyi_gaussian,
    renyi_gaussian_mr, renyi_grid, renyi_inverse_gamma, renyi_nig, renyi_normal_1d,
    renyi_quadrature, renyi_truncexp_vs_exp,
)
from .mixture import gaussian_kl, gmm_kl_upper_bound
from .monte_carlo import MonteCarloEstimate, kl_monte_carlo, renyi_monte_carlo

__all__ = [
    'DivergenceOrder', 'OrderKind', 'KL', 'MR',
    'renyi', 'renyi_gaussian', 'renyi_gaussian_mr', 'renyi_beta', 'renyi_inverse_gamma',
    'renyi_nig', 'renyi_truncexp_vs_exp', 'renyi_normal_1d', 'renyi_grid', 'renyi_quadrature',
    'relative_belief', 'relative_belief_norm',
    'gaussian_kl', 'gmm_kl_upper_bound',
    'MonteCarloEstimate', 'kl_monte_carlo', 'renyi_monte_carlo',
]
