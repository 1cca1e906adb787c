"""
Prior-Data Conflict Checker Package.

This package checks Bayesian priors against observed data by calibrating
Rényi divergences between posterior and prior against the prior predictive.
"""

__version__ = '0.1.0'
__author__ = 'Prior Checking Project Team'
