"""
Command implementations. Each returns the process exit status.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.conflict import (
    SCHEMA_VERSION, CheckReport, HierarchicalSplit, asymptotic_limit_p,
    asymptotic_limit_p_hierarchical, conflict_p_value, em_p_value, hierarchical_p1,
    hierarchical_p1_cv, hierarchical_p2, one_sided_p1, p_value_curve, per_unit_reports,
    reports_to_frame,
)
from src.conflict.checks import STAGE_OBSERVED
from src.core.distributions import BetaDist
from src.core.errors import ConfigError
from src.core.rng import replicate_rng
from src.divergence.order import DivergenceOrder
from src.export import write_curve, write_replicates, write_trace, write_unit_table
from src.models.base import HierarchicalModel
from src.models.dataset import Dataset
from src.models.fitting import fit_posterior
from .config import RunConfig

logger = logging.getLogger(__name__)


def load_data(config: RunConfig) -> Dataset:
    if not config.data:
        raise ConfigError("data", "a data file is required for this command")
    return Dataset.from_csv(config.data)


def write_reports(reports: Sequence[CheckReport], path: Optional[str], keep_replicates: bool):
    """JSON report(s) at ``path``; a single kept replicate vector also goes to ``<stem>_replicates.csv``."""
    if not path:
        return
    path = Path(path)
    if len(reports) == 1:
        reports[0].save(path, keep_replicates)
        if keep_replicates:
            write_replicates(reports[0], path.with_name(f"{path.stem}_replicates.csv"))
        return
    payload = {"schema_version": SCHEMA_VERSION,
               "reports": [r.to_dict(keep_replicates) for r in reports]}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    logger.info(f"{len(reports)} reports written to {path}")


def export_trace(model, data: Dataset, config: RunConfig):
    """
    Refit the observed data on the check's own stream and write its ELBO trace.

    Raises:
        ConfigError: The model is not fitted variationally.
    """
    if not config.trace:
        return
    fit = fit_posterior(model, data, config.fit_config(), replicate_rng(config.seed, STAGE_OBSERVED, 0))
    if fit.trace is None:
        raise ConfigError("trace", f"{model.name} is not fitted variationally; there is no ELBO trace")
    write_trace(fit.trace, config.trace)


def print_report(report: CheckReport):
    print(report.summary())
    for flag in report.flags:
        print(f"   ⚠️  {flag}")


def cmd_check(config: RunConfig, evans_moshonov: bool = False) -> int:
    """Plain prior-predictive check, or the Evans-Moshonov check."""
    model = config.build_model()
    data = load_data(config)
    export_trace(model, data, config)
    print(f"=== Prior-data conflict check: {model.name} ===")
    if evans_moshonov:
        report = em_p_value(model, data, config.M, config.seed, config.workers)
    else:
        report = conflict_p_value(model, data, config.divergence_order, config.M, config.seed,
                                  config.workers, config.fit_config())
    print_report(report)
    write_reports([report], config.output, config.keep_replicates)
    return 0


def cmd_hier_check(config: RunConfig, level: int = 1, unit: Optional[str] = None,
                   all_units: bool = False, cross_validated: bool = False,
                   one_sided: bool = False) -> int:
    """Checks of the conditional (level 1) or marginal (level 2) hierarchical prior."""
    model = config.build_model()
    if not isinstance(model, HierarchicalModel):
        raise ConfigError("model", f"{model.name} is not hierarchical")
    data = load_data(config)
    export_trace(model, data, config)
    order = config.divergence_order
    common = dict(M=config.M, seed=config.seed, workers=config.workers, config=config.fit_config())
    print(f"=== Hierarchical conflict check: {model.name}, level {level} ===")
    if level == 2:
        reports = [hierarchical_p2(model, data, order, **common)]
    elif level != 1:
        raise ConfigError("level", f"must be 1 or 2, got {level}")
    elif all_units:
        reports = per_unit_reports(model, data, order, inner_draws=config.inner_draws,
                                   cross_validated=cross_validated, one_sided=one_sided, **common)
        table = reports_to_frame(reports)
        print(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
        if config.output:
            write_unit_table(table, Path(config.output).with_suffix(".csv"))
    elif one_sided:
        if unit is None:
            raise ConfigError("unit", "a one-sided check needs --unit")
        reports = [one_sided_p1(model, data, unit, order, inner_draws=config.inner_draws,
                                cross_validated=cross_validated, **common)]
    elif cross_validated:
        if unit is None:
            raise ConfigError("unit", "a cross-validated check needs --unit")
        reports = [hierarchical_p1_cv(model, data, unit, order, inner_draws=config.inner_draws, **common)]
    else:
        split = HierarchicalSplit.for_model(model, unit)
        reports = [hierarchical_p1(model, data, order, inner_draws=config.inner_draws,
                                   split=split, **common)]
    for report in reports:
        print_report(report)
    write_reports(reports, config.output, config.keep_replicates)
    return 0


def cmd_curve(nu_values: Sequence[float], t_min: float, t_max: float, points: int,
              order: DivergenceOrder, output: Optional[str]) -> int:
    """Exact p-value curves of the shifted-exponential model on a log-spaced t grid."""
    if not 0 < t_min < t_max:
        raise ConfigError("t_range", f"need 0 < t_min < t_max, got {t_min}, {t_max}")
    if points < 2:
        raise ConfigError("points", f"need at least two points, got {points}")
    grid = np.geomspace(t_min, t_max, points)
    frame = p_value_curve(nu_values, grid, order)
    print(f"=== p-value curve ({order}) ===")
    for nu, group in frame.groupby("nu"):
        print(f"  nu={nu:g}: t0={group['t0'].iloc[0]:.4f}, "
              f"p range [{group['p_value'].min():.4f}, {group['p_value'].max():.4f}]")
    if output:
        write_curve(frame, output)
    else:
        print(frame.to_csv(index=False))
    return 0


def cmd_asymptotic(config: RunConfig, theta_star: List[float], n_draws: int,
                   jeffreys: bool = False, hierarchical: bool = False) -> int:
    """Large-sample limiting p-value at theta*."""
    model = config.build_model()
    print(f"=== Limiting p-value: {model.name} ===")
    if hierarchical:
        report = asymptotic_limit_p_hierarchical(model, theta_star, n_draws, config.seed)
    else:
        prior = None
        if jeffreys:
            if model.name != "binomial":
                raise ConfigError("jeffreys", "a Jeffreys prior is only shipped for the binomial model")
            prior = BetaDist(0.5, 0.5)
        report = asymptotic_limit_p(model, theta_star, n_draws, config.seed, prior)
    print_report(report)
    write_reports([report], config.output, keep_replicates=False)
    return 0
