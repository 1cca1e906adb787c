"""Desk-scale reproductions of the worked examples. Run with --runslow."""

import json

import pytest

from src.cli import cmd_reproduce


def _manifest(example, tmp_path):
    assert cmd_reproduce(example, str(tmp_path), seed=2024) == 0
    return json.loads((tmp_path / "manifest.json").read_text())["entries"]


def _failures(entries):
    return [e["quantity"] for e in entries if e["within_tolerance"] is False]


@pytest.mark.slow
@pytest.mark.parametrize("example", [1, 3, 4])
def test_closed_form_examples(example, tmp_path):
    assert _failures(_manifest(example, tmp_path)) == []


@pytest.mark.slow
def test_cancer_mortality_prior_means(tmp_path):
    entries = _manifest(5, tmp_path)
    p_values = [e["produced"] for e in entries]
    assert p_values == sorted(p_values, reverse=True)
    assert _failures(entries) == []


@pytest.mark.slow
def test_bristol_is_the_outlier(tmp_path):
    entries = _manifest(6, tmp_path)
    by_name = {e["quantity"]: e for e in entries}
    assert by_name["p_kl[Bristol]"]["produced"] < 0.05
    assert by_name["p_kl_cv[Bristol]"]["produced"] < 0.05
    assert by_name["spearman"]["produced"] > 0.8
    assert (tmp_path / "example6.csv").exists()
