"""Configuration layering, the command-line driver and the reproduction manifest."""

import json

import pandas as pd
import pytest

from src.cli import cmd_reproduce, parse_set, resolve
from src.core.errors import ConfigError
from src.main import EXIT_NUMERICAL, EXIT_USAGE, main


@pytest.fixture
def binomial_csv(tmp_path):
    path = tmp_path / "binomial.csv"
    path.write_text("y,n\n7,10\n")
    return path


def test_parse_set():
    assert parse_set("a=1, b = x ,") == {"a": "1", "b": "x"}
    assert parse_set(None) == {}
    with pytest.raises(ConfigError):
        parse_set("a=1,oops")


def test_resolve_precedence():
    config = resolve(
        "binomial",
        {"M": 50, "a": 3, "seed": 1},
        {"M": 80, "seed": None},
        {"M": "120", "fit.window": "50"},
    )
    assert config.M == 120
    assert config.seed == 1
    assert config.model_params == {"a": 3.0}
    assert config.fit_config().window == 50
    assert config.build_model().a == 3.0


def test_resolve_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError) as info:
        resolve("binomial", {}, {}, {"sigmasq": "1"})
    assert info.value.key == "sigmasq"
    with pytest.raises(ConfigError):
        resolve("binomial", {}, {}, {"M": "many"})
    with pytest.raises(ConfigError):
        resolve("binomial", {}, {}, {"order": "alpha:-2"})
    with pytest.raises(ConfigError):
        resolve("poisson", {}, {}, {})


def test_invalid_order_exits_with_usage_status(binomial_csv):
    assert main(["check", "--model", "binomial", "--data", str(binomial_csv),
                 "--order", "alpha:-2"]) == EXIT_USAGE


def test_missing_data_file_exits_with_usage_status(tmp_path):
    assert main(["check", "--model", "binomial", "--data", str(tmp_path / "none.csv")]) == EXIT_USAGE


def test_limit_of_non_regular_model_exits_with_usage_status():
    assert main(["asymptotic", "--model", "shifted-exponential", "--theta-star", "1.0",
                 "--n-draws", "100"]) == EXIT_USAGE


def test_too_many_failed_replicates_exit_with_numerical_status(monkeypatch, binomial_csv):
    from src.cli import commands
    from src.core.errors import NumericalAbortError

    def abort(*args, **kwargs):
        raise NumericalAbortError("Too many non-finite replicate discrepancies", {"n_nonfinite": 40})

    monkeypatch.setattr(commands, "conflict_p_value", abort)
    assert main(["check", "--model", "binomial", "--data", str(binomial_csv)]) == EXIT_NUMERICAL


def test_check_writes_a_report(tmp_path, binomial_csv, capsys):
    output = tmp_path / "report.json"
    status = main(["check", "--model", "binomial", "--data", str(binomial_csv), "--order", "mr",
                   "--output", str(output), "--keep-replicates"])
    assert status == 0
    payload = json.loads(output.read_text())
    assert payload["schema_version"] == 1
    assert payload["order"] == "mr"
    assert "enumeration" in payload["flags"]
    assert payload["p_value"] == pytest.approx(8.0 / 11.0)
    assert len(payload["replicate_discrepancies"]) == 11
    assert "Prior-data conflict check" in capsys.readouterr().out


def test_set_overrides_model_parameters(tmp_path, binomial_csv):
    output = tmp_path / "report.json"
    assert main(["check", "--model", "binomial", "--data", str(binomial_csv), "--em",
                 "--set", "a=2,b=2", "--output", str(output)]) == 0
    payload = json.loads(output.read_text())
    assert payload["variant"] == "em"
    assert payload["replicate_discrepancies"] is None


def test_curve_writes_a_csv(tmp_path):
    output = tmp_path / "curve.csv"
    assert main(["curve", "--nu", "4", "--points", "20", "--output", str(output)]) == 0
    frame = pd.read_csv(output)
    assert list(frame.columns) == ["nu", "t_obs", "p_value", "t0"]
    assert len(frame) == 20


def test_reproduce_reports_a_missing_fixture(tmp_path):
    assert main(["reproduce", "5", "--output", str(tmp_path / "out"),
                 "--data-dir", str(tmp_path / "nowhere")]) == EXIT_USAGE


def test_reproduce_binomial_example(tmp_path):
    assert cmd_reproduce(2, str(tmp_path)) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["example"] == 2
    assert len(manifest["entries"]) == 22
    assert all(entry["within_tolerance"] for entry in manifest["entries"])


def test_kept_replicates_also_go_to_csv(tmp_path, binomial_csv):
    output = tmp_path / "report.json"
    assert main(["check", "--model", "binomial", "--data", str(binomial_csv), "--output", str(output),
                 "--keep-replicates"]) == 0
    frame = pd.read_csv(tmp_path / "report_replicates.csv")
    assert list(frame.columns) == ["replicate", "discrepancy", "weight"]
    assert frame["weight"].sum() == pytest.approx(1.0)


def test_trace_needs_a_variational_model(tmp_path, binomial_csv):
    assert main(["check", "--model", "binomial", "--data", str(binomial_csv),
                 "--trace", str(tmp_path / "trace.csv")]) == EXIT_USAGE


def test_trace_export(tmp_path):
    from src.export import write_trace
    from src.variational import fit_gaussian_vb
    from tests.scenarios import create_normal_location_scenario, create_quick_fit_config

    model, data = create_normal_location_scenario()
    fit = fit_gaussian_vb(model, data, config=create_quick_fit_config())
    frame = pd.read_csv(write_trace(fit.trace, tmp_path / "trace.csv"))
    assert list(frame.columns) == ["iteration", "elbo", "grad_norm"]
    assert len(frame) == fit.iterations
