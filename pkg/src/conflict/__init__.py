"""
Conflict checking engine.

Prior-predictive divergence checks, the Evans-Moshonov comparator, the
hierarchical variants and the large-sample limits.
"""

from .report import SCHEMA_VERSION, CheckReport, CheckVariant
from .checks import DEFAULT_M, conflict_p_value, discrepancy, em_p_value, order_sweep
from .hierarchical import (
    DEFAULT_INNER_DRAWS, HierarchicalSplit, hierarchical_p1, hierarchical_p1_cv, hierarchical_p2,
    one_sided_p1, per_unit_reports, per_unit_table, reports_to_frame,
)
from .asymptotic import asymptotic_limit_p, asymptotic_limit_p_hierarchical, laplace_kl_approximation
from .tail import exact_tail_p_value, minimising_t, p_value_curve, tail_p_value_monte_carlo

__all__ = [
    'SCHEMA_VERSION', 'CheckReport', 'CheckVariant', 'DEFAULT_M', 'DEFAULT_INNER_DRAWS',
    'conflict_p_value', 'discrepancy', 'em_p_value', 'order_sweep',
    'HierarchicalSplit', 'hierarchical_p1', 'hierarchical_p1_cv', 'hierarchical_p2', 'one_sided_p1',
    'per_unit_reports', 'per_unit_table', 'reports_to_frame',
    'asymptotic_limit_p', 'asymptotic_limit_p_hierarchical', 'laplace_kl_approximation',
    'exact_tail_p_value', 'minimising_t', 'p_value_curve', 'tail_p_value_monte_carlo',
]
