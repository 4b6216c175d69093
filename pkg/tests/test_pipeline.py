"""Tests for configuration, artifact files and the end-to-end pipeline."""
import json

import numpy as np
import pytest

from conftest import SMALL_DIM, small_config_dict
from src.evaluation.metrics import analyze_state, check_report_consistency, state_digest
from src.evaluation.table1 import compare_to_table1, unexpected_failures
from src.fock.constructors import fock_state
from src.fock.functionals import mean_photon
from src.fock.states import DensityMatrix, Parity
from src.optics.channels import prepare_squeezed
from src.optics.heralding import HeraldingError, herald_subtract
from src.phase_space.css_analysis import nearest_css
from src.phase_space.wigner import wigner
from src.pipeline.config import (ConfigError, config_from_dict, config_to_dict, grid_for_dim,
                                 load_config, save_config, with_overrides)
from src.pipeline.io import (load_report, load_state, load_wigner_grid, save_report, save_state,
                             state_from_dict, state_to_dict)
from src.pipeline.presets import (TABLE1_ROWS, Preset, get_preset, get_preset_config,
                                  get_preset_description, get_table1_row)
from src.pipeline.run import (PipelineStageError, compare_herald_rates, export_wigner_grid,
                              forward_model, reproduce_table1, run_pipeline, simulate_forward)

ARTIFACTS = ("config.json", "state_forward.json", "dataset.csv", "state_mle.json",
             "report.json", "wigner.csv", "wigner_ideal_css.csv")


# ---------------------------------------------------------------- configuration

def test_config_round_trip(small_config, tmp_path):
    """A saved configuration loads back equal, defaults included."""
    assert config_from_dict(config_to_dict(small_config)) == small_config
    loaded = load_config(save_config(small_config, tmp_path / "config.json"))
    assert loaded == small_config


def test_config_defaults():
    """Only the physics keys and the label are required."""
    raw = small_config_dict()
    for key in ("schedule", "n_samples", "mle", "bootstrap_n", "seed", "grid"):
        del raw[key]
    raw["squeeze"] = {"V0_dB": -1.0, "gamma_s": 0.1}
    config = config_from_dict(raw)
    assert config.dim == 30
    assert config.n_samples == 100_000
    assert config.mle.max_iters == 2000
    assert config.mle.gamma_h == config.gamma_h
    assert config.grid == grid_for_dim(30)
    assert config.label == "small-apd"


@pytest.mark.parametrize("section,key", [
    (None, "gamma_h"),
    ("squeeze", "V0_dB"),
    ("herald", "modal_purity_xi"),
    (None, "label"),
])
def test_config_missing_key(section, key):
    """A missing physics key names the key."""
    raw = small_config_dict()
    (raw[section] if section else raw).pop(key)
    with pytest.raises(ConfigError, match=key):
        config_from_dict(raw)


@pytest.mark.parametrize("kind,key", [("tes", "max_resolved"), ("multiplexed_apd", "n_apds")])
def test_config_detector_resolution_required(kind, key):
    """Counting detectors must state their resolution."""
    herald = {"reflectivity_R": 0.05, "n_subtract": 1, "modal_purity_xi": 0.9,
              "detector": {"kind": kind, "efficiency": 0.5}}
    with pytest.raises(ConfigError, match=key):
        config_from_dict(small_config_dict(herald=herald))


def test_config_validation():
    """Empty labels, single resamples and grids beyond the truncation are refused."""
    with pytest.raises(ConfigError):
        config_from_dict(small_config_dict(label=""))
    with pytest.raises(ConfigError):
        config_from_dict(small_config_dict(bootstrap_n=1))
    with pytest.raises(ConfigError):
        config_from_dict(small_config_dict(grid={"q_min": -5, "q_max": 5, "n_q": 21,
                                                 "p_min": -5, "p_max": 5, "n_p": 21}))
    with pytest.raises(ConfigError):
        config_from_dict(small_config_dict(seed=-1))


def test_unheralded_config():
    """herald: null describes the bare squeezed source."""
    config = config_from_dict(small_config_dict(herald=None))
    assert config.herald is None
    assert config_to_dict(config)["herald"] is None


def test_with_overrides(small_config):
    """Overrides replace fields; a smaller dim refits the grid."""
    changed = with_overrides(small_config, seed=99, resamples=5, samples=10, dim=8)
    assert changed.seed == 99
    assert changed.bootstrap_n == 5
    assert changed.n_samples == 10
    assert changed.dim == 8
    assert changed.grid.max_radius() <= 4.0 + 1e-9
    assert changed.grid.n_q == small_config.grid.n_q
    assert with_overrides(small_config) == small_config


def test_presets():
    """Every preset builds; the Table-1 presets map to their rows."""
    for preset in Preset:
        config = get_preset_config(preset)
        assert config.label == preset.value
        assert get_preset_description(preset) != "Unknown preset"
    assert get_table1_row(Preset.THREE_PHOTON_TES) == "TES-3"
    assert get_table1_row(Preset.VACUUM_CHECK) is None
    assert get_preset_config(Preset.THREE_PHOTON_TES).n_samples == 1087
    assert get_preset_config(Preset.VACUUM_CHECK).herald is None
    assert len(TABLE1_ROWS) == 4
    with pytest.raises(ValueError):
        get_preset("four-photon-tes")


# ---------------------------------------------------------------- files

def test_state_round_trip(odd_css, tmp_path):
    """States survive JSON exactly and carry a checked digest."""
    loaded = load_state(save_state(odd_css, tmp_path / "state.json"))
    assert np.array_equal(loaded.elements, odd_css.elements)

    raw = state_to_dict(odd_css)
    raw["elements"][0][0] += 1e-3
    with pytest.raises(ValueError):
        state_from_dict(raw)


def test_report_round_trip(single_photon, tmp_path):
    """A report read back from disk still passes its consistency check."""
    report = analyze_state(single_photon, "one", grid_for_dim(10, 21), herald_prob=0.01,
                           diagnostics={"iterations": 3})
    loaded = load_report(save_report(report, tmp_path / "report.json"))
    assert check_report_consistency(loaded) == []
    assert loaded.metrics() == report.metrics()
    assert loaded.parity is Parity.ODD
    assert loaded.herald_prob == 0.01
    assert loaded.diagnostics["iterations"] == 3


def test_vacuum_wigner_grid(tmp_path):
    """Vacuum peaks at 1/pi on the default grid; the file keeps grid and digest."""
    vac = DensityMatrix.from_pure(fock_state(0, 30))
    grid = grid_for_dim(30)
    path = export_wigner_grid(vac, grid, tmp_path / "wigner.csv")
    values, loaded_grid, digest = load_wigner_grid(path)
    assert loaded_grid == grid
    assert digest == state_digest(vac)
    assert values.shape == (201, 201)
    assert values.max() == pytest.approx(1 / np.pi, abs=1e-8)
    assert values[100, 100] == values.max()


def test_single_photon_wigner_grid(single_photon, tmp_path):
    """|1> reaches -1/pi at the origin."""
    path = export_wigner_grid(single_photon, grid_for_dim(10, 41), tmp_path / "wigner.csv")
    values, _, _ = load_wigner_grid(path)
    assert values.min() == pytest.approx(-1 / np.pi, abs=1e-6)
    assert path.read_text().startswith("#wigner-grid,q_min=-")


# ---------------------------------------------------------------- forward model

def test_forward_model_without_light_fails():
    """Total source loss leaves nothing to herald."""
    config = config_from_dict(small_config_dict(squeeze={"V0_dB": -3.0, "gamma_s": 1.0}))
    with pytest.raises(HeraldingError):
        forward_model(config)


def test_ideal_forward_model_has_odd_parity():
    """Lossless single subtraction with an ideal counter leaves odd photon numbers only."""
    herald = {"reflectivity_R": 0.01, "n_subtract": 1, "modal_purity_xi": 1.0,
              "detector": {"kind": "tes", "efficiency": 1.0, "max_resolved": 10}}
    config = config_from_dict(small_config_dict(squeeze={"V0_dB": -3.0, "gamma_s": 0.0},
                                                herald=herald))
    rho = forward_model(config)
    assert np.all(rho.populations()[0::2] < 1e-12)
    assert nearest_css(rho).parity is Parity.ODD


def test_one_photon_preset_forward():
    """The one-photon APD preset lands near the published mean photon number."""
    forward = simulate_forward(get_preset_config(Preset.ONE_PHOTON_APD))
    assert 0.0 < forward.herald_prob < 1.0
    assert mean_photon(forward.state) == pytest.approx(1.96, abs=0.3)
    assert nearest_css(forward.state).parity is Parity.ODD


def test_unheralded_forward_is_squeezed_source():
    """Without a herald the forward model returns the lossy squeezed state."""
    config = config_from_dict(small_config_dict(herald=None))
    forward = simulate_forward(config)
    assert forward.herald_prob is None
    assert nearest_css(forward.state).parity is Parity.EVEN


def test_tes_heralds_two_photons_faster_than_apds():
    """The TES two-photon herald rate exceeds the APD coincidence rate."""
    ratio = compare_herald_rates(get_preset_config(Preset.TWO_PHOTON_TES),
                                 get_preset_config(Preset.TWO_PHOTON_APD))
    assert ratio > 1.0
    with pytest.raises(ValueError):
        compare_herald_rates(get_preset_config(Preset.VACUUM_CHECK),
                             get_preset_config(Preset.TWO_PHOTON_APD))


# ---------------------------------------------------------------- pipeline

def test_run_pipeline_artifacts(small_config, tmp_path):
    """One run writes every artifact and passes its consistency checks."""
    result = run_pipeline(small_config, tmp_path)
    for name in ARTIFACTS:
        assert (tmp_path / name).exists(), name
    assert not (tmp_path / "bootstrap.json").exists()
    assert result.passed
    assert len(result.dataset) == small_config.n_samples
    assert result.report.herald_prob == result.forward.herald_prob
    assert result.mle.state.dim.dim == SMALL_DIM
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["diagnostics"]["termination"] in ("stop_delta", "max_iters", "stalled")


def test_run_pipeline_is_deterministic(small_config, tmp_path):
    """The same configuration and seed give byte-identical dataset and report."""
    run_pipeline(small_config, tmp_path / "a")
    run_pipeline(small_config, tmp_path / "b")
    for name in ("dataset.csv", "report.json", "wigner.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_pipeline_names_failed_stage(tmp_path):
    """Errors surface as PipelineStageError naming the stage."""
    config = config_from_dict(small_config_dict(squeeze={"V0_dB": -3.0, "gamma_s": 1.0}))
    with pytest.raises(PipelineStageError) as info:
        run_pipeline(config, tmp_path)
    assert info.value.stage == "forward"
    assert isinstance(info.value.__cause__, HeraldingError)


@pytest.mark.slow
def test_run_pipeline_with_bootstrap(tmp_path):
    """bootstrap_n >= 2 adds percentile bands and bootstrap.json."""
    config = config_from_dict(small_config_dict(bootstrap_n=3))
    result = run_pipeline(config, tmp_path)
    assert result.bootstrap is not None
    saved = json.loads((tmp_path / "bootstrap.json").read_text())
    assert saved["resamples"] == 3
    assert set(saved["intervals"]) == {"fidelity", "alpha", "mean_photon", "w_min"}


@pytest.mark.slow
def test_reproduce_table1(tmp_path):
    """A reduced Table-1 run writes one line per row and metric plus the herald-rate remark."""
    table = reproduce_table1(tmp_path, samples=3000, resamples=2, seed=1)
    assert (tmp_path / "table1.csv").exists()
    metrics = table[table["metric"] != "report_consistency"]
    assert set(metrics["row"]) == {"APD-1", "APD-2", "TES-2", "TES-3", "remark"}
    remark = table[table["row"] == "remark"].iloc[0]
    assert remark["metric"] == "herald_rate_ratio_TES2_APD2"
    assert remark["model"] > 1.0
    assert set(table.loc[table["known_gap"].astype(bool), "row"]) <= {"TES-3"}
    for preset in TABLE1_ROWS:
        assert (tmp_path / preset.value / "report.json").exists()


def test_one_photon_preset_is_negative_at_origin():
    """One-photon heralding leaves a negative Wigner function at the origin."""
    assert wigner(forward_model(get_preset_config(Preset.ONE_PHOTON_APD)), 0.0, 0.0) < 0.0


def test_three_photon_background_washes_out_negativity():
    """The heralded three-photon state is negative at the origin; mixing in the background is not."""
    config = get_preset_config(Preset.THREE_PHOTON_TES)
    heralded, _ = herald_subtract(prepare_squeezed(config.squeeze, config.dim), config.herald)
    assert wigner(heralded, 0.0, 0.0) < 0.0
    assert wigner(forward_model(config), 0.0, 0.0) > 0.0


@pytest.mark.slow
@pytest.mark.parametrize("preset", list(TABLE1_ROWS))
def test_forward_states_meet_table1_tolerances(preset):
    """Forward states land within the Table-1 tolerances apart from the listed model gaps."""
    config = get_preset_config(preset)
    forward = simulate_forward(config)
    report = analyze_state(forward.state, preset.value, config.grid, forward.herald_prob)
    table = compare_to_table1(TABLE1_ROWS[preset], report)
    assert unexpected_failures(table).empty, table.to_string()
    if preset is Preset.THREE_PHOTON_TES:
        assert table.set_index("metric").loc["mean_photon", "passed"]
    else:
        assert table["passed"].all(), table.to_string()
