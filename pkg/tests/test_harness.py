import math
import os

import numpy as np
import pandas as pd
import pytest

from app.models.noise_model import NoiseCovariance
from app.models.observation_model import Seed
from app.models.path_model import blockwise_truth, preset
from app.utils import harness
from app.utils.errors import ConfigError, DegenerateInput
from app.utils.simulation import simulate_observations

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")

SMALL = {
    "preset": "parametric_s4",
    "n": "600",
    "h_inv": "10",
    "r_ratio": "2",
    "K": "3",
    "replications": "6",
    "master_seed": "3",
}


def small_config(**overrides):
    pairs = dict(SMALL)
    pairs.update({key: str(value) for key, value in overrides.items()})
    return harness.parse_config(pairs)


def test_preset_defaults_fill_missing_keys():
    cfg = harness.parse_config({"preset": "timevarying_s4_small"})
    assert (cfg.n, cfg.replications) == (7500, 1000)
    assert cfg.geometry().J == cfg.n // cfg.h_inv


def test_config_errors_are_collected():
    with pytest.raises(ConfigError) as excinfo:
        harness.parse_config({"preset": "nope", "n": "many", "colour": "blue", "estimators": "specv_oracle,lasso"})
    assert {"preset", "n", "colour", "estimators"} <= set(excinfo.value.fields)


def test_custom_preset_needs_spot_values():
    with pytest.raises(ConfigError) as excinfo:
        harness.parse_config({"preset": "custom", "sigma_x": "1.0"})
    assert set(excinfo.value.fields) == {"sigma_y", "rho"}
    with pytest.raises(ConfigError) as excinfo:
        harness.parse_config({"rho": "0.3"})
    assert "rho" in excinfo.value.fields


def test_geometry_problems_point_at_h_inv():
    with pytest.raises(ConfigError) as excinfo:
        harness.parse_config({"n": "1000", "h_inv": "7"})
    assert set(excinfo.value.fields) == {"h_inv"}


@pytest.mark.parametrize("key,value", [
    ("replications", "0"), ("noise_source", "specv_oracle:guessed"), ("noise_variant", "median"),
    ("model_tag", "E2"), ("estimators", "msrc,msrc"), ("J", "0"), ("msrc_M", "0"), ("quad_points", "2"),
])
def test_invalid_values_are_rejected(key, value):
    with pytest.raises(ConfigError) as excinfo:
        small_config(**{key: value})
    assert excinfo.value.fields


def test_config_lines_round_trip():
    cfg = small_config(
        estimators="specv_oracle,msrc_oracle", noise_source="specv_oracle:estimated", msrc_grid="0.5,1.0,2.0", J="auto",
        eta_xy="0.002",
    )
    back = harness.parse_config(dict(line.split("=", 1) for line in cfg.to_lines()))
    assert back == cfg
    assert cfg.geometry().J == min(60, math.ceil(math.sqrt(600) * math.log(600)))


def test_load_config_with_overrides(tmp_path):
    target = tmp_path / "run.cfg"
    target.write_text("# small run\npreset=parametric_s4\nn=600\nh_inv=10\nestimators=realized,msrc\n")
    cfg = harness.load_config(str(target), {"replications": 4, "eta_x": None})
    assert cfg.replications == 4
    assert cfg.estimators == ("realized", "msrc")
    with pytest.raises(ConfigError):
        harness.load_config(str(tmp_path / "missing.cfg"))


def test_noise_source_defaults():
    cfg = small_config(noise_source="spev_x:known")
    assert cfg.source_for("specv_adaptive") == "estimated"
    assert cfg.source_for("spev_x") == "known"
    assert cfg.source_for("specv_oracle") == "known"


def test_truths_of_both_models():
    cfg = small_config(preset="timevarying_s4")
    assert harness.truths(cfg)["XY"] == pytest.approx(0.00269, abs=1e-5)
    blockwise = small_config(preset="timevarying_s4", model_tag="E3")
    spec = preset("timevarying_s4")
    assert harness.truths(blockwise) == {
        which: blockwise_truth(spec.path, 10, which) for which in ("XY", "X", "Y")
    }


def test_run_estimator_dispatch():
    cfg = small_config()
    context = harness.estimation_context(cfg)
    obs = simulate_observations(harness.build_model(cfg), cfg.n, Seed(1, 2))
    for name in ("specv_oracle", "specv_j1", "specv_uniform", "spev_y", "realized", "msrc"):
        report = harness.run_estimator(name, obs, context)
        assert math.isfinite(report.value)
    estimated = harness.run_estimator("specv_adaptive", obs, context, "estimated")
    assert estimated.tuning.noise_source == "estimated" and estimated.tuning.seed == "1:2"
    assert harness.run_estimator("msrc", obs, context).tuning.M == math.ceil(math.sqrt(600))
    with pytest.raises(DegenerateInput):
        harness.run_estimator("msrc_oracle", obs, context)
    with pytest.raises(DegenerateInput):
        harness.run_estimator("specv_oracle", obs, harness.EstimationContext(cfg.geometry(), NoiseCovariance.zero()))
    with pytest.raises(DegenerateInput):
        harness.run_estimator("lasso", obs, context)


def test_experiment_is_reproducible_across_workers(tmp_path):
    cfg = small_config(estimators="specv_oracle,specv_adaptive,spev_x,realized,msrc,msrc_oracle")
    serial = harness.run_experiment(cfg, workers=1)
    parallel = harness.run_experiment(cfg, workers=2)
    pd.testing.assert_frame_equal(serial.replications, parallel.replications)
    pd.testing.assert_frame_equal(serial.summary, parallel.summary)

    harness.write_outputs(serial, str(tmp_path / "a"))
    harness.write_outputs(parallel, str(tmp_path / "b"))
    for name in ("summary.csv", "replications.csv", "config.cfg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "timings.csv").exists()

    summary = serial.summary.set_index("estimator")
    assert list(summary.index) == list(cfg.estimators)
    assert summary.loc["spev_x", "truth"] == pytest.approx(1.0)
    assert (summary["count"] == 6).all() and (summary["errors"] == 0).all()
    assert any("msrc_oracle selected" in message for message in serial.warnings)
    standardization = serial.replications.groupby("estimator")["standardization"].first()
    assert standardization["specv_oracle"] == "plugin"
    assert standardization["realized"] == "empirical"


def test_single_replication():
    report = harness.run_experiment(small_config(replications=1, estimators="specv_oracle"))
    row = report.summary.iloc[0]
    assert row["count"] == 1
    assert row["variance"] == 0.0
    assert math.isnan(row["ks_pvalue"])


def test_estimator_failures_become_row_errors():
    cfg = small_config(preset="custom", sigma_x=0.0, sigma_y=0.0, rho=0.0, eta_x=0.0, eta_y=0.0,
                       estimators="specv_oracle,realized", replications=3)
    report = harness.run_experiment(cfg)
    summary = report.summary.set_index("estimator")
    assert summary.loc["specv_oracle", "errors"] == 3
    assert summary.loc["specv_oracle", "count"] == 0
    assert summary.loc["realized", "errors"] == 0
    assert summary.loc["realized", "mean"] == 0.0
    failed = report.replications[report.replications["estimator"] == "specv_oracle"]
    assert failed["error"].str.startswith("DegenerateDenominator").all()


def test_variance_curves():
    noise = NoiseCovariance.from_levels(0.1, 0.1)
    frame = harness.variance_curves([-0.5, 0.0, 0.5], noise=noise, constants=(1.0, 2.0, 0.5))
    assert list(frame.columns) == [
        "rho", "sigma_x", "sigma_y", "eta_x", "eta_y", "eta_xy", "v_local", "clt_variance", "msrc_avar",
    ]
    np.testing.assert_allclose(frame["clt_variance"], 0.1 * frame["v_local"], rtol=1e-8)
    assert frame.loc[2, "clt_variance"] == pytest.approx(0.46022, abs=1e-5)
    assert frame["msrc_avar"].nunique() == 1

    varying = harness.variance_curves([0.3], noise=noise, time_varying=True)
    assert "msrc_avar" not in varying.columns
    assert math.isnan(varying.loc[0, "v_local"]) and varying.loc[0, "clt_variance"] > 0


def test_identity_checks_pass():
    report = harness.run_identity_checks(nh_values=(4, 16), samples=10, seed=4)
    assert set(report["identity"]) == {
        "orthogonality_cos", "orthogonality_sin", "summation_by_parts", "parseval", "noiseless_reduction",
        "reciprocity", "msrc_weights",
    }
    assert report["passed"].all(), report[~report["passed"]]


def test_preset_names():
    names = harness.preset_names()
    assert "timevarying_s4_small" in names and names[-1] == "custom"


@pytest.mark.slow
def test_small_timevarying_study(tmp_path):
    cfg = harness.load_config(os.path.join(CONFIG_DIR, "study_timevarying_small.cfg"), {"outputs": str(tmp_path)})
    report = harness.run_experiment(cfg, workers=4)
    summary = report.summary.set_index("estimator")
    assert abs(summary.loc["specv_oracle", "bias"]) < 3 * math.sqrt(summary.loc["specv_oracle", "variance"] / 1000) + 1e-5
    for name in ("specv_adaptive", "spev_x", "spev_y"):
        assert abs(summary.loc[name, "bias"]) < 4 * math.sqrt(summary.loc[name, "variance"] / 1000), name


def test_readme_lists_every_config_key():
    readme = os.path.join(os.path.dirname(CONFIG_DIR), "README.md")
    with open(readme, encoding="utf-8") as handle:
        text = handle.read()
    missing = [key for key in harness.SCHEMA if f"`{key}`" not in text]
    assert not missing


def _standard_error(summary, name):
    return math.sqrt(summary.loc[name, "variance"] / summary.loc[name, "count"])


@pytest.mark.slow
def test_parametric_study_at_desk_scale(tmp_path):
    cfg = harness.load_config(
        os.path.join(CONFIG_DIR, "study_parametric.cfg"), {"outputs": str(tmp_path), "replications": "2000"}
    )
    summary = harness.run_experiment(cfg, workers=4).summary.set_index("estimator")
    assert 0.42 <= summary.loc["specv_oracle", "scaled_variance"] <= 0.56
    # subsample averages rescaled by n / (m (n - m + 1)) land near 0.51
    assert 0.45 <= summary.loc["msrc_oracle", "scaled_variance"] <= 0.60
    for name in ("specv_oracle", "specv_adaptive"):
        assert abs(summary.loc[name, "mean"] - 0.5) < 4 * _standard_error(summary, name), name


@pytest.mark.slow
def test_timevarying_study_at_desk_scale(tmp_path):
    cfg = harness.load_config(
        os.path.join(CONFIG_DIR, "study_timevarying.cfg"), {"outputs": str(tmp_path), "replications": "2000"}
    )
    summary = harness.run_experiment(cfg, workers=4).summary.set_index("estimator")
    assert summary.loc["specv_oracle", "truth"] == pytest.approx(0.00269, abs=1e-5)
    assert 0.0012 <= summary.loc["specv_oracle", "rmse"] <= 0.0019
    for name in ("specv_adaptive", "spev_x", "spev_y"):
        assert abs(summary.loc[name, "bias"]) < 4 * _standard_error(summary, name), name
    assert summary.loc["specv_oracle", "rmse"] < summary.loc["specv_adaptive", "rmse"]
    upper = {"specv_adaptive": 0.0045, "msrc_oracle": 0.0050, "spev_x": 0.0090, "spev_y": 0.0108}
    for name, edge in upper.items():
        assert summary.loc[name, "rmse"] <= edge, name
    assert summary.loc["specv_oracle", "ks_pvalue"] > 0.001
