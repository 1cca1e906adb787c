"""Conditional, marginal, cross-validated and one-sided hierarchical checks."""

import numpy as np
import pytest

from src.conflict import (
    CheckReport, CheckVariant, HierarchicalSplit, hierarchical_p1, hierarchical_p1_cv,
    hierarchical_p2, one_sided_p1, per_unit_reports, reports_to_frame,
)
from src.conflict.hierarchical import _ConditionalRun, _one_sided
from src.core.errors import ValidationError
from src.divergence.order import KL, DivergenceOrder
from src.models.dataset import Dataset
from tests.scenarios import (
    create_nig_scenario, create_normal_location_scenario, create_quick_fit_config,
    create_random_effects_scenario,
)


def test_conditional_check_matches_closed_form():
    model, data = create_nig_scenario()
    report = hierarchical_p1(model, data, KL, M=2000, inner_draws=100, seed=3, workers=1)
    closed = model.closed_form_p1(data)
    assert report.variant is CheckVariant.HIER1
    assert report.diagnostics["closed_form_p"] == pytest.approx(closed)
    assert report.diagnostics["shared_theta2_draws"] is True
    assert report.p_value == pytest.approx(closed, abs=4 * report.mc_std_error + 0.02)


def test_conditional_check_flags_a_shifted_mean():
    model, data = create_nig_scenario(mean=6.0, variance=1.0)
    report = hierarchical_p1(model, data, DivergenceOrder.finite(0.5), M=500, inner_draws=50,
                             seed=1, workers=1)
    assert report.p_value < 0.05
    assert report.conflict


def test_split_must_follow_the_prior():
    model, data = create_nig_scenario()
    with pytest.raises(ValidationError):
        hierarchical_p1(model, data, M=10, split=HierarchicalSplit(("sigma2",), ("mu",)))
    with pytest.raises(ValidationError):
        hierarchical_p1(model, data, M=10, split=HierarchicalSplit(("mu",), ("mu",)))
    with pytest.raises(ValidationError):
        hierarchical_p1(model, data, M=10, split=HierarchicalSplit.for_model(model, unit=0))


def test_non_hierarchical_model_cannot_be_split():
    model, data = create_normal_location_scenario()
    with pytest.raises(ValidationError):
        HierarchicalSplit(("mu",), ("sigma2",)).validate(model)


def test_unit_checks_need_units():
    model, data = create_nig_scenario()
    with pytest.raises(ValidationError):
        per_unit_reports(model, data, M=10)
    with pytest.raises(ValidationError):
        hierarchical_p1_cv(model, data, 0, M=10)


def test_marginal_check():
    model, data = create_nig_scenario()
    report = hierarchical_p2(model, data, KL, M=300, seed=2, workers=1)
    assert report.variant is CheckVariant.HIER2
    assert 0.0 <= report.p_value <= 1.0
    assert report.replicate_discrepancies.shape == (300,)


def test_marginal_check_flags_an_inflated_variance():
    model, data = create_nig_scenario(variance=60.0)
    assert hierarchical_p2(model, data, KL, M=400, seed=2, workers=1).p_value < 0.05


def _run(observed_mean):
    return _ConditionalRun(
        observed=2.5,
        replicates=np.array([1.0, 2.0, 3.0, 4.0]),
        observed_mean=observed_mean,
        replicate_means=np.array([1.0, -1.0, 1.0, 1.0]),
        flags=[],
        diagnostics={},
    )


def test_one_sided_tail_for_an_excess():
    p, se, flags = _one_sided(_run(0.7))
    assert p == 0.5
    assert se == pytest.approx(0.25)
    assert flags == []


def test_one_sided_tail_for_a_deficit_adds_the_lower_tail():
    p, _, _ = _one_sided(_run(-0.7))
    assert p == 1.0


def test_one_sided_tail_at_zero_mean_is_flagged():
    p, _, flags = _one_sided(_run(0.0))
    assert p == 0.5
    assert "sign_boundary" in flags


def test_one_sided_tail_ignores_excess_with_negative_effects():
    run = _run(0.7)
    run.replicate_means = -np.ones(4)
    assert _one_sided(run)[0] == 0.0


def test_reports_to_frame():
    reports = [
        CheckReport(1.0, [], 0.2, 0.01, KL, 0, 100, CheckVariant.HIER1_ONE_SIDED, ["sign_boundary"],
                    {"observed_unit_mean": 0.0}, "logistic-re", "A"),
        CheckReport(0.5, [], 0.7, 0.01, KL, 0, 100, CheckVariant.HIER1_CV, [], {}, "logistic-re", "B"),
    ]
    frame = reports_to_frame(reports)
    assert list(frame.columns) == ["unit", "variant", "discrepancy_obs", "p_value", "mc_std_error",
                                   "observed_unit_mean", "flags"]
    assert frame["unit"].tolist() == ["A", "B"]
    assert frame.loc[0, "flags"] == "sign_boundary"


@pytest.mark.slow
def test_one_sided_check_flags_the_high_mortality_unit():
    model, data = create_random_effects_scenario()
    report = one_sided_p1(model, data, "A", KL, M=60, inner_draws=50, seed=5, workers=2,
                          config=create_quick_fit_config(seed=5))
    assert report.unit == "A"
    assert report.variant is CheckVariant.HIER1_ONE_SIDED
    assert report.diagnostics["observed_unit_mean"] > 0
    assert report.p_value < 0.2


@pytest.mark.slow
def test_per_unit_reports_cover_every_unit_in_label_order():
    model, data = create_random_effects_scenario()
    shuffled = data.take([2, 0, 3, 1])
    reports = per_unit_reports(model, shuffled, KL, M=20, inner_draws=30, seed=1, workers=2,
                               config=create_quick_fit_config(seed=1))
    assert [r.unit for r in reports] == ["A", "B", "C", "D"]
    assert all(r.variant is CheckVariant.HIER1 for r in reports)
    assert all(np.isfinite(r.discrepancy_obs) for r in reports)


@pytest.mark.slow
def test_cross_validation_with_one_unit_uses_the_prior():
    model = create_random_effects_scenario()[0]
    data = Dataset([12.0], [50.0], ("solo",))
    report = hierarchical_p1_cv(model, data, "solo", KL, M=5, inner_draws=20, seed=0, workers=1,
                                config=create_quick_fit_config())
    assert report.variant is CheckVariant.HIER1_CV
    assert "held_out_prior" in report.flags
    assert report.diagnostics["cross_validated"] is True


@pytest.mark.slow
def test_per_unit_table():
    from src.conflict import per_unit_table

    model, data = create_random_effects_scenario()
    table = per_unit_table(model, data, KL, M=20, inner_draws=30, seed=1, workers=2, one_sided=True,
                           config=create_quick_fit_config(seed=1))
    assert table["unit"].tolist() == ["A", "B", "C", "D"]
    assert (table["variant"] == "hier1_one_sided").all()
    assert table["observed_unit_mean"].notna().all()
