"""Prior-predictive divergence checks and their reports."""

import numpy as np
import pytest
from scipy import stats

from src.conflict import CheckReport, CheckVariant, conflict_p_value, discrepancy, em_p_value, order_sweep
from src.conflict.checks import tail_probability
from src.conflict.tail import discrepancy_of_t
from src.core.errors import NumericalAbortError, ValidationError
from src.core.rng import make_rng
from src.divergence.order import KL, MR, DivergenceOrder
from src.models.dataset import Dataset
from tests.scenarios import (
    create_binomial_scenario, create_normal_location_scenario, create_shifted_exponential_scenario,
)

EXAMPLE1_P = 2.0 * stats.norm.sf(np.sqrt(2.0))


@pytest.mark.parametrize("order", [KL, DivergenceOrder.finite(0.5), MR])
def test_normal_location_p_value(order):
    """Every order ranks replicates by |ybar - mu0|, so all agree with the closed form."""
    model, data = create_normal_location_scenario()
    report = conflict_p_value(model, data, order, M=4000, seed=1, workers=1)
    assert report.variant is CheckVariant.PLAIN
    assert report.p_value == pytest.approx(EXAMPLE1_P, abs=0.03)
    assert report.replicate_discrepancies.shape == (4000,)


def test_p_values_are_uniform_without_conflict():
    # y drawn from the prior predictive N(mu0, sigma0sq + sigmasq)
    model, _ = create_normal_location_scenario()
    rng = make_rng(31)
    observed = np.sqrt(model.sigma0sq + model.sigmasq) * rng.standard_normal(500) + model.mu0
    p_values = [conflict_p_value(model, Dataset([y]), KL, M=200, seed=rep, workers=1).p_value
                for rep, y in enumerate(observed)]
    assert stats.kstest(p_values, "uniform").pvalue > 0.01


def test_binomial_mr_is_enumerated():
    model, data = create_binomial_scenario(y=7)
    report = conflict_p_value(model, data, MR)
    assert "enumeration" in report.flags
    assert report.M == 11
    assert report.mc_std_error == 0.0
    assert report.p_value == pytest.approx(8.0 / 11.0, abs=1e-12)


@pytest.mark.parametrize("y, expected", [(0, 2.0 / 11.0), (5, 1.0), (3, 8.0 / 11.0)])
def test_binomial_tail_counts_symmetric_outcomes(y, expected):
    model, data = create_binomial_scenario(y=y)
    assert conflict_p_value(model, data, KL).p_value == pytest.approx(expected, abs=1e-12)


def test_evans_moshonov_is_uninformative_under_a_flat_predictive():
    model, data = create_binomial_scenario(y=7)
    report = em_p_value(model, data)
    assert report.variant is CheckVariant.EM
    assert report.order is None
    assert report.p_value == pytest.approx(1.0)


def test_evans_moshonov_matches_kl_for_normal_location():
    model, data = create_normal_location_scenario()
    kl = conflict_p_value(model, data, KL, M=500, seed=4, workers=1)
    em = em_p_value(model, data, M=500, seed=4, workers=1)
    assert em.p_value == kl.p_value


def test_worker_count_does_not_change_the_result():
    model, data = create_normal_location_scenario()
    one = conflict_p_value(model, data, KL, M=300, seed=8, workers=1)
    four = conflict_p_value(model, data, KL, M=300, seed=8, workers=4)
    assert np.array_equal(one.replicate_discrepancies, four.replicate_discrepancies)
    assert one.p_value == four.p_value


def test_row_order_does_not_change_the_result():
    model, _ = create_normal_location_scenario()
    a = conflict_p_value(model, Dataset([0.3, 2.0, 1.1]), KL, M=200, seed=2, workers=1)
    b = conflict_p_value(model, Dataset([1.1, 0.3, 2.0]), KL, M=200, seed=2, workers=1)
    assert a.discrepancy_obs == b.discrepancy_obs
    assert np.array_equal(a.replicate_discrepancies, b.replicate_discrepancies)


def test_order_sweep_gives_one_report_per_order():
    model, data = create_normal_location_scenario()
    orders = [DivergenceOrder.finite(0.5), KL, MR]
    reports = order_sweep(model, data, orders, M=100, seed=0, workers=1)
    assert [r.order for r in reports] == orders


def test_empty_data_has_zero_discrepancy():
    model, _ = create_normal_location_scenario()
    assert discrepancy(model, Dataset.empty(), KL) == 0.0


def test_shifted_exponential_discrepancy_depends_on_t():
    model, data = create_shifted_exponential_scenario()
    assert discrepancy(model, data, KL) == pytest.approx(discrepancy_of_t(1.5, 4.0), rel=1e-9)


def test_tail_probability_counts_ties():
    values = np.array([1.0, 2.0, 2.0 - 1e-12, 3.0])
    p, se, flags = tail_probability(values, 2.0)
    assert p == 0.75
    assert se == pytest.approx(np.sqrt(0.75 * 0.25 / 4))
    assert flags == []


def test_tail_probability_with_weights():
    p, se, _ = tail_probability(np.array([0.0, 1.0, 2.0]), 1.0, np.array([0.5, 0.25, 0.25]))
    assert p == pytest.approx(0.5)
    assert se == 0.0


def test_tail_probability_tolerates_few_nonfinite_values():
    values = np.append(np.arange(199.0), np.nan)
    p, _, flags = tail_probability(values, 100.0)
    assert flags == ["nonfinite_replicates"]
    assert p == pytest.approx(99.0 / 199.0)


def test_tail_probability_aborts_on_many_nonfinite_values():
    values = np.array([1.0] * 95 + [np.inf] * 5)
    with pytest.raises(NumericalAbortError) as info:
        tail_probability(values, 0.5)
    assert info.value.diagnostics["n_nonfinite"] == 5


def test_report_json_round_trip():
    model, data = create_binomial_scenario(y=2)
    report = conflict_p_value(model, data, DivergenceOrder.finite(0.5))
    restored = CheckReport.from_json(report.to_json())
    assert restored == report
    assert restored.order == DivergenceOrder.finite(0.5)
    assert np.allclose(restored.replicate_weights, report.replicate_weights)


def test_report_without_replicates():
    report = CheckReport(1.2, np.arange(5.0), 0.4, 0.2, KL, 0, 5, CheckVariant.PLAIN)
    payload = report.to_dict(keep_replicates=False)
    assert payload["replicate_discrepancies"] is None
    assert payload["schema_version"] == 1
    assert CheckReport.from_dict(payload).replicate_discrepancies.size == 0


def test_report_validation():
    with pytest.raises(ValidationError):
        CheckReport(0.0, [], 1.5, 0.0, KL, 0, 10, CheckVariant.PLAIN)
    with pytest.raises(ValidationError):
        CheckReport(0.0, [], 0.5, 0.0, KL, 0, 0, CheckVariant.PLAIN)
    with pytest.raises(ValidationError):
        CheckReport(0.0, [1.0, 2.0], 0.5, 0.0, KL, 0, 10, CheckVariant.PLAIN)
    with pytest.raises(ValidationError):
        CheckReport.from_dict({"schema_version": 99})


def test_report_summary():
    flagged = CheckReport(3.0, [], 0.01, 0.003, KL, 0, 1000, CheckVariant.HIER1, unit="Bristol")
    assert flagged.summary().startswith("🔴")
    assert "[Bristol]" in flagged.summary()
    assert CheckReport(0.1, [], 0.6, 0.01, KL, 0, 1000, CheckVariant.PLAIN).summary().startswith("🟢")
