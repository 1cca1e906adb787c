"""
Test package for the prior-data conflict checker.

Scenario builders live in ``tests.scenarios`` and are shared by all suites.
"""

from .scenarios import (
    create_binomial_scenario, create_bristol_scenario, create_cancer_mortality_scenario,
    create_nig_scenario, create_normal_location_scenario, create_quick_fit_config,
    create_random_effects_scenario, create_shifted_exponential_scenario, create_small_nig_scenario,
)

__all__ = [
    'create_binomial_scenario', 'create_bristol_scenario', 'create_cancer_mortality_scenario',
    'create_nig_scenario', 'create_normal_location_scenario', 'create_quick_fit_config',
    'create_random_effects_scenario', 'create_shifted_exponential_scenario', 'create_small_nig_scenario',
]
