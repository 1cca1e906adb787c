"""
Checks for hierarchical priors g(theta1 | theta2) g(theta2).

The conditional check compares g(theta1 | theta2, y) with g(theta1 | theta2)
averaged over theta2 draws from the observed-data posterior. Its reference
distribution draws theta2 from that same posterior, theta1 from the
conditional prior and then data. One set of theta2 draws is shared by the
observed value and every replicate.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.core.errors import ValidationError
from src.core.rng import replicate_rng
from src.divergence.order import KL, DivergenceOrder
from src.divergence.renyi import renyi
from src.models.base import HierarchicalModel, PosteriorResult
from src.models.dataset import Dataset
from src.models.fitting import fit_posterior, prior_predictive_sample
from src.variational.config import FitConfig
from .checks import (
    DEFAULT_M, STAGE_HELD_OUT, STAGE_OBSERVED, STAGE_REPLICATES, STAGE_THETA2,
    _replicate_config, run_replicates, tail_probability, tie_band, tie_threshold,
)
from .report import CheckReport, CheckVariant, binomial_std_error

logger = logging.getLogger(__name__)

DEFAULT_INNER_DRAWS = 200

Unit = Union[int, str]


@dataclass(frozen=True)
class HierarchicalSplit:
    """
    Partition of the parameter into the checked block theta1 and the
    hyperparameters theta2, optionally restricted to one unit.
    """

    theta1: Tuple[str, ...]
    theta2: Tuple[str, ...]
    unit: Optional[Unit] = None

    @classmethod
    def for_model(cls, model: HierarchicalModel, unit: Optional[Unit] = None) -> "HierarchicalSplit":
        return cls(tuple(model.theta1_names), tuple(model.theta2_names), unit)

    def validate(self, model) -> None:
        """
        Raises:
            ValidationError: The prior does not factorise this way, or a unit
                is given for a model without units.
        """
        if not isinstance(model, HierarchicalModel):
            raise ValidationError(f"{model.name} has no hierarchical prior to split")
        if set(self.theta1) & set(self.theta2):
            raise ValidationError(f"Blocks overlap: {sorted(set(self.theta1) & set(self.theta2))}")
        if (set(self.theta1) != set(model.theta1_names)
                or set(self.theta2) != set(model.theta2_names)):
            raise ValidationError(
                f"{model.name} splits as theta1={list(model.theta1_names)}, "
                f"theta2={list(model.theta2_names)}")
        if self.unit is not None and not model.has_units:
            raise ValidationError(f"{model.name} has no unit-level parameters")


def _prepare(model: HierarchicalModel, data_obs: Dataset,
             split: HierarchicalSplit) -> Tuple[Dataset, Optional[int]]:
    split.validate(model)
    data = model.prepare(data_obs)
    if split.unit is None:
        return data, None
    labelled = data_obs.with_default_units() if model.has_units else data_obs
    if isinstance(split.unit, str) and data.units is not None and split.unit in data.units:
        return data, data.units.index(split.unit)
    row = labelled.unit_index(split.unit)
    return data, data.units.index(labelled.units[row])


@dataclass
class _ConditionalRun:
    observed: float
    replicates: np.ndarray
    observed_mean: Optional[float]
    replicate_means: Optional[np.ndarray]
    flags: List[str]
    diagnostics: dict


def _simulate_refits(model: HierarchicalModel, data: Dataset, source: Optional[PosteriorResult],
                     observed: PosteriorResult, M: int, seed: Optional[int], stage: int,
                     workers: Optional[int], config: Optional[FitConfig]):
    """Replicate datasets from theta2 ~ ``source`` (prior when None) and their posterior fits."""
    replicate_config = _replicate_config(observed, config)

    def replicate(i: int):
        rng = replicate_rng(seed, stage, i)
        theta2 = model.theta2_draws(source, 1, rng)[0]
        y = model.simulate_from_theta2(theta2, data, rng)
        return y, fit_posterior(model, y, replicate_config, rng, warm_start=observed.state)

    return run_replicates(replicate, M, workers)


def _conditional_values(model: HierarchicalModel, unit: Optional[int], order: DivergenceOrder,
                        theta2: np.ndarray, observed: PosteriorResult, data: Dataset,
                        refits, track_mean: bool) -> _ConditionalRun:
    flags = list(observed.flags)
    d_obs, obs_flags = model.conditional_discrepancy(observed, data, theta2, order, unit)
    flags += obs_flags
    values = np.empty(len(refits))
    means = np.empty(len(refits)) if track_mean else None
    unconverged = 0
    for i, (y, fit) in enumerate(refits):
        values[i], rep_flags = model.conditional_discrepancy(fit, y, theta2, order, unit)
        flags += rep_flags
        unconverged += not fit.converged
        if track_mean:
            means[i] = model.unit_posterior_mean(fit, unit)
    diagnostics = {"inner_draws": int(theta2.shape[0]), "shared_theta2_draws": True,
                   "observed_fit": observed.diagnostics}
    if unconverged:
        flags.append("non_converged_fit")
        diagnostics["non_converged_replicates"] = unconverged
    observed_mean = model.unit_posterior_mean(observed, unit) if track_mean else None
    return _ConditionalRun(float(d_obs), values, observed_mean, means,
                           sorted(set(flags), key=flags.index), diagnostics)


def _conditional_run(model, data, unit, order, M, inner_draws, seed, workers, config,
                     cross_validated: bool, track_mean: bool) -> _ConditionalRun:
    observed = fit_posterior(model, data, config or FitConfig(seed=seed or 0),
                             replicate_rng(seed, STAGE_OBSERVED, 0))
    source = observed
    stage = STAGE_REPLICATES
    if cross_validated:
        held_out = data.drop_unit(unit)
        source = None
        if held_out.size:
            source = fit_posterior(model, held_out, config or FitConfig(seed=seed or 0),
                                   replicate_rng(seed, STAGE_HELD_OUT, unit))
        else:
            logger.info("Held-out dataset is empty; theta2 is drawn from its prior")
        stage = STAGE_HELD_OUT + 1 + unit
    theta2 = model.theta2_draws(source, inner_draws, replicate_rng(seed, STAGE_THETA2, 0))
    refits = _simulate_refits(model, data, source, observed, M, seed, stage, workers, config)
    run = _conditional_values(model, unit, order, theta2, observed, data, refits, track_mean)
    run.diagnostics["cross_validated"] = cross_validated
    if cross_validated and source is None:
        run.flags.append("held_out_prior")
    return run


def _unit_label(data: Dataset, unit: Optional[int]) -> Optional[str]:
    return None if unit is None else data.unit_label(unit)


def _tail_report(model, data, unit, run: _ConditionalRun, order, seed, M, variant) -> CheckReport:
    p, std_error, flags = tail_probability(run.replicates, run.observed)
    if hasattr(model, "closed_form_p1") and unit is None:
        run.diagnostics["closed_form_p"] = model.closed_form_p1(data)
    return CheckReport(run.observed, run.replicates, p, std_error, order, seed, M, variant,
                       run.flags + flags, run.diagnostics, model.name, _unit_label(data, unit))


def hierarchical_p1(model: HierarchicalModel, data_obs: Dataset, order: DivergenceOrder = KL,
                    M: int = DEFAULT_M, inner_draws: int = DEFAULT_INNER_DRAWS,
                    seed: Optional[int] = 0, workers: Optional[int] = None,
                    split: Optional[HierarchicalSplit] = None,
                    config: Optional[FitConfig] = None) -> CheckReport:
    """
    Conflict check for the conditional prior g(theta1 | theta2).

    Args:
        model: Hierarchical model.
        data_obs: Observed data.
        order: Divergence order.
        M: Replicates.
        inner_draws: theta2 draws averaged over in each discrepancy.
        seed: Master seed.
        workers: Thread count.
        split: Block partition, optionally naming a unit; the model's own
            partition when None.
        config: Variational settings.

    Returns:
        CheckReport: variant "hier1".
    """
    split = split or HierarchicalSplit.for_model(model)
    data, unit = _prepare(model, data_obs, split)
    run = _conditional_run(model, data, unit, order, M, inner_draws, seed, workers, config,
                           cross_validated=False, track_mean=False)
    report = _tail_report(model, data, unit, run, order, seed, M, CheckVariant.HIER1)
    logger.info(f"{model.name} conditional check{_for(report)}: p = {report.p_value:.4f}")
    return report


def hierarchical_p1_cv(model: HierarchicalModel, data_obs: Dataset, unit: Unit,
                       order: DivergenceOrder = KL, M: int = DEFAULT_M,
                       inner_draws: int = DEFAULT_INNER_DRAWS, seed: Optional[int] = 0,
                       workers: Optional[int] = None,
                       config: Optional[FitConfig] = None) -> CheckReport:
    """
    Cross-validated conditional check for one unit.

    theta2 comes from the posterior given all other units, both in the
    averaged discrepancy and in the reference distribution. With a single
    unit that posterior is the prior.

    Raises:
        ValidationError: The unit is out of range or the model has no units.
    """
    data, index = _prepare(model, data_obs, HierarchicalSplit.for_model(model, unit))
    run = _conditional_run(model, data, index, order, M, inner_draws, seed, workers, config,
                           cross_validated=True, track_mean=False)
    report = _tail_report(model, data, index, run, order, seed, M, CheckVariant.HIER1_CV)
    logger.info(f"{model.name} cross-validated check{_for(report)}: p = {report.p_value:.4f}")
    return report


def _one_sided(run: _ConditionalRun) -> Tuple[float, float, List[str]]:
    """
    Excess-only tail. For a positive observed unit mean, P(D >= d_obs and m > 0);
    for a negative one, P(D <= d_obs) + P(D >= d_obs and m > 0).
    """
    values, means = run.replicates, run.replicate_means
    finite = np.isfinite(values)
    _, _, flags = tail_probability(values, run.observed)
    values, means = values[finite], means[finite]
    upper = (values >= tie_threshold(run.observed)) & (means > 0)
    if run.observed_mean < 0:
        hits = upper | (values <= run.observed + tie_band(run.observed))
    else:
        hits = upper
        if run.observed_mean == 0:
            flags.append("sign_boundary")
    p = float(np.mean(hits))
    return p, binomial_std_error(p, int(hits.size)), flags


def one_sided_p1(model: HierarchicalModel, data_obs: Dataset, unit: Unit,
                 order: DivergenceOrder = KL, M: int = DEFAULT_M,
                 inner_draws: int = DEFAULT_INNER_DRAWS, seed: Optional[int] = 0,
                 workers: Optional[int] = None, cross_validated: bool = False,
                 config: Optional[FitConfig] = None) -> CheckReport:
    """
    One-sided conditional check for a unit's random effect, sensitive to
    excess (positive effects) only.

    The branch is chosen by the sign of the unit's posterior mean under the
    observed-data fit.
    """
    data, index = _prepare(model, data_obs, HierarchicalSplit.for_model(model, unit))
    run = _conditional_run(model, data, index, order, M, inner_draws, seed, workers, config,
                           cross_validated=cross_validated, track_mean=True)
    return _one_sided_report(model, data, index, run, order, seed, M)


def _one_sided_report(model, data, index, run: _ConditionalRun, order, seed, M) -> CheckReport:
    p, std_error, flags = _one_sided(run)
    run.diagnostics["observed_unit_mean"] = run.observed_mean
    run.diagnostics["cross_validated"] = run.diagnostics.get("cross_validated", False)
    report = CheckReport(run.observed, run.replicates, p, std_error, order, seed, M,
                         CheckVariant.HIER1_ONE_SIDED, run.flags + flags, run.diagnostics,
                         model.name, _unit_label(data, index))
    logger.info(f"{model.name} one-sided check{_for(report)}: p = {report.p_value:.4f}")
    return report


def hierarchical_p2(model: HierarchicalModel, data_obs: Dataset, order: DivergenceOrder = KL,
                    M: int = DEFAULT_M, seed: Optional[int] = 0, workers: Optional[int] = None,
                    config: Optional[FitConfig] = None) -> CheckReport:
    """
    Conflict check for the marginal prior g(theta2): the plain check applied
    to the theta2 marginal, with the full prior predictive as reference.
    """
    split = HierarchicalSplit.for_model(model)
    data, _ = _prepare(model, data_obs, split)
    config = config or FitConfig(seed=seed or 0)
    observed = fit_posterior(model, data, config, replicate_rng(seed, STAGE_OBSERVED, 0))
    prior = model.theta2_prior
    d_obs = float(renyi(model.theta2_marginal(observed), prior, order))
    replicate_config = _replicate_config(observed, config)

    def replicate(i: int) -> Tuple[float, bool]:
        rng = replicate_rng(seed, STAGE_REPLICATES, i)
        y = prior_predictive_sample(model, data, rng)
        fit = fit_posterior(model, y, replicate_config, rng, warm_start=observed.state)
        return float(renyi(model.theta2_marginal(fit), prior, order)), fit.converged

    results = run_replicates(replicate, M, workers)
    values = np.array([r[0] for r in results])
    p, std_error, flags = tail_probability(values, d_obs)
    flags = list(observed.flags) + flags
    if not all(r[1] for r in results):
        flags.append("non_converged_fit")
    logger.info(f"{model.name} marginal theta2 check: p = {p:.4f} (s.e. {std_error:.4f})")
    return CheckReport(d_obs, values, p, std_error, order, seed, M, CheckVariant.HIER2,
                       sorted(set(flags), key=flags.index), {"observed_fit": observed.diagnostics},
                       model.name)


def per_unit_reports(model: HierarchicalModel, data_obs: Dataset, order: DivergenceOrder = KL,
                     M: int = DEFAULT_M, inner_draws: int = DEFAULT_INNER_DRAWS,
                     seed: Optional[int] = 0, workers: Optional[int] = None,
                     cross_validated: bool = False, one_sided: bool = False,
                     units: Optional[Sequence[Unit]] = None,
                     config: Optional[FitConfig] = None) -> List[CheckReport]:
    """
    Conditional checks for every unit.

    Without cross-validation all units share one observed fit, one set of
    theta2 draws and one set of replicate fits.
    """
    split = HierarchicalSplit.for_model(model)
    split.validate(model)
    data = model.prepare(data_obs)
    if not model.has_units:
        raise ValidationError(f"{model.name} has no unit-level parameters")
    indices = (list(range(data.size)) if units is None
               else [_prepare(model, data_obs, HierarchicalSplit.for_model(model, u))[1] for u in units])
    reports = []
    if cross_validated:
        for index in indices:
            run = _conditional_run(model, data, index, order, M, inner_draws, seed, workers, config,
                                   cross_validated=True, track_mean=one_sided)
            reports.append(_one_sided_report(model, data, index, run, order, seed, M) if one_sided
                           else _tail_report(model, data, index, run, order, seed, M, CheckVariant.HIER1_CV))
        return reports

    observed = fit_posterior(model, data, config or FitConfig(seed=seed or 0),
                             replicate_rng(seed, STAGE_OBSERVED, 0))
    theta2 = model.theta2_draws(observed, inner_draws, replicate_rng(seed, STAGE_THETA2, 0))
    refits = _simulate_refits(model, data, observed, observed, M, seed, STAGE_REPLICATES, workers, config)
    for index in indices:
        run = _conditional_values(model, index, order, theta2, observed, data, refits, one_sided)
        run.diagnostics["cross_validated"] = False
        reports.append(_one_sided_report(model, data, index, run, order, seed, M) if one_sided
                       else _tail_report(model, data, index, run, order, seed, M, CheckVariant.HIER1))
    return reports


def per_unit_table(model: HierarchicalModel, data_obs: Dataset, order: DivergenceOrder = KL,
                   M: int = DEFAULT_M, inner_draws: int = DEFAULT_INNER_DRAWS,
                   seed: Optional[int] = 0, workers: Optional[int] = None,
                   cross_validated: bool = False, one_sided: bool = False,
                   config: Optional[FitConfig] = None) -> pd.DataFrame:
    """Per-unit p-values as a table with one row per unit, in canonical unit order."""
    reports = per_unit_reports(model, data_obs, order, M, inner_draws, seed, workers,
                               cross_validated, one_sided, config=config)
    return reports_to_frame(reports)


def reports_to_frame(reports: Sequence[CheckReport]) -> pd.DataFrame:
    return pd.DataFrame([{
        "unit": r.unit,
        "variant": r.variant.value,
        "discrepancy_obs": r.discrepancy_obs,
        "p_value": r.p_value,
        "mc_std_error": r.mc_std_error,
        "observed_unit_mean": r.diagnostics.get("observed_unit_mean"),
        "flags": ";".join(r.flags),
    } for r in reports])


def _for(report: CheckReport) -> str:
    return f" for {report.unit}" if report.unit is not None else ""
