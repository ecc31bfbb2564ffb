"""Tests for configuration loading, unit suffixes and validators."""
import copy
import json
import math

import pytest

from src.config.config_manager import (
    DEFAULT_CONFIG,
    OUTPUT_DIR_ENV,
    ConfigManager,
    ConfigValidationError,
    deep_merge,
    get_output_dir,
)
from src.config.experiment_config import (
    build_experiment_config,
    load_experiment_config,
    physics_grid,
    validate_config,
)
from src.models.models import Regime
from src.utils import units
from src.utils.validators import ValidationReport, validate_choices, validate_scene_template, validate_sweep_grid


def with_changes(**sections):
    return deep_merge(DEFAULT_CONFIG, sections)


def test_defaults_are_valid():
    assert validate_config(copy.deepcopy(DEFAULT_CONFIG)) == []


def test_defaults_build_in_si_units():
    cfg = build_experiment_config(copy.deepcopy(DEFAULT_CONFIG), "power")
    assert cfg.atomic.n0 == pytest.approx(4.89e16)
    assert cfg.atomic.cell_length == pytest.approx(0.1)
    assert cfg.optics.omega_c == pytest.approx(2 * math.pi * 10e6)
    assert cfg.lo.vartheta == pytest.approx(math.radians(20))
    assert cfg.photodetector.lna_gain == pytest.approx(100.0)
    assert cfg.geometry.m_sensors == 10
    assert cfg.geometry.spacing == pytest.approx(cfg.geometry.carrier_wavelength / 2)
    assert cfg.scene.bandwidth == pytest.approx(100e3)
    assert cfg.regimes == (Regime.PSL, Regime.SQL, Regime.CLASSICAL)
    assert cfg.sweep.variable == "reflected_power"
    assert cfg.sweep.grid[0] == -10.0


def test_unit_suffix_can_be_switched():
    data = with_changes(optics={"omega_c_khz": 500.0})
    assert "omega_c_mhz" not in data["optics"]
    cfg = build_experiment_config(data)
    assert cfg.optics.omega_c == pytest.approx(2 * math.pi * 500e3)


def test_unknown_key_is_reported():
    errors = validate_config(with_changes(atomic={"colour": 1}))
    assert any("atomic.colour: unknown key" in e for e in errors)


def test_unknown_suffix_is_reported():
    errors = validate_config(with_changes(optics={"omega_p_furlong": 1.0}))
    assert any("unknown unit suffix '_furlong'" in e for e in errors)


def test_wrong_dimension_suffix_is_reported():
    errors = validate_config(with_changes(optics={"omega_p_cm": 1.0}))
    assert any(e.startswith("optics.omega_p_cm:") for e in errors)


def test_unknown_section_is_reported():
    assert "unknown section 'antenna'" in validate_config(with_changes(antenna={}))


@pytest.mark.parametrize("changes, fragment", [
    ({"experiment": {"regimes": ["PSL", "QUANTUM"]}}, "unknown regime 'QUANTUM'"),
    ({"experiment": {"trials": 0}}, "experiment.trials"),
    ({"experiment": {"unbounded_policy": "ignore"}}, "experiment.unbounded_policy"),
    ({"scene": {"k_targets": 10}}, "k_targets < m_sensors"),
    ({"sweeps": {"power": {"variable": "reflected_power", "grid": [10.0, 0.0, 20.0]}}}, "strictly monotone"),
    ({"sweeps": {"power": {"variable": "colour", "grid": [1]}}}, "unknown variable"),
    ({"rational": {"a": [1, 2], "b": [1, 2, 3], "c": [1, 2, 3]}}, "rational.a"),
])
def test_invalid_values_are_reported(changes, fragment):
    errors = validate_config(with_changes(**changes))
    assert any(fragment in e for e in errors), errors


def test_build_raises_with_every_problem():
    data = with_changes(experiment={"trials": 0, "n_samples": 0})
    with pytest.raises(ConfigValidationError) as info:
        build_experiment_config(data)
    assert "experiment.trials" in str(info.value)
    assert "experiment.n_samples" in str(info.value)


def test_missing_sweep_name_is_reported():
    with pytest.raises(ConfigValidationError, match="no sweep named 'spiral'"):
        build_experiment_config(copy.deepcopy(DEFAULT_CONFIG), "spiral")


def test_rational_coefficients_default_to_the_atomic_scale():
    data = with_changes(rational={"a": [0.0, 0.0, 1.0], "b": [0.0, 0.0, 1.0], "c": [0.0, 0.0, 1.0]})
    cfg = build_experiment_config(data)
    assert cfg.rational.varsigma < 0


def test_json_syntax_error_names_line_and_column(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "experiment": ,\n}\n', encoding="utf-8")
    with pytest.raises(ConfigValidationError, match=r"broken\.json:2:\d+:"):
        ConfigManager(path)


def test_top_level_must_be_an_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigValidationError):
        ConfigManager(path)


def test_dotted_get_and_set():
    manager = ConfigManager()
    assert manager.get("experiment.trials") == 500
    assert manager.get("experiment.nothing", "fallback") == "fallback"
    manager.set("experiment.trials", 12)
    assert manager.resolved()["experiment"]["trials"] == 12
    assert DEFAULT_CONFIG["experiment"]["trials"] == 500


def test_saved_config_reloads_identically(tmp_path):
    manager = ConfigManager()
    manager.set("experiment.master_seed", 99)
    path = manager.save_config(tmp_path / "saved.json")
    assert ConfigManager(path).resolved() == manager.resolved()


def test_manifest_replays_its_resolved_config(tmp_path):
    resolved = with_changes(experiment={"master_seed": 31, "trials": 4})
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"command": "sweep power", "resolved_config": resolved}), encoding="utf-8")
    cfg, manager = load_experiment_config(path, sweep_name="power")
    assert manager.resolved() == resolved
    assert cfg.master_seed == 31
    assert cfg.trials == 4


def test_command_line_overrides_skip_none(tmp_path):
    cfg, _ = load_experiment_config(None, "power", {"experiment.trials": 3, "experiment.workers": None})
    assert cfg.trials == 3
    assert cfg.workers == 1


def test_output_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert get_output_dir().name == "results"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert get_output_dir() == tmp_path
    assert get_output_dir("elsewhere").name == "elsewhere"


def test_physics_grid_leaves_out_zero():
    grid = physics_grid(with_changes(physics={"omega_rf_max_mhz": 2.0, "omega_rf_points": 4}))
    assert grid.omega_rf[0] == pytest.approx(2 * math.pi * 0.5e6)
    assert grid.omega_rf[-1] == pytest.approx(2 * math.pi * 2e6)
    assert len(grid.omega_rf) == 4
    assert len(grid.detunings) == 2


@pytest.mark.parametrize("key, expected", [
    ("omega_p_mhz", ("omega_p", "mhz")),
    ("n0_cm3", ("n0", "cm3")),
    ("cell_length_cm", ("cell_length", "cm")),
    ("gamma2_total_mhz", ("gamma2_total", "mhz")),
    ("k_targets", ("k_targets", None)),
    ("upsilon", ("upsilon", None)),
])
def test_parse_unit_key(key, expected):
    assert units.parse_unit_key(key) == expected


def test_unit_conversion():
    assert units.to_si(1.0, "angular_rate", "mhz") == pytest.approx(2 * math.pi * 1e6)
    assert units.to_si([90.0, -45.0], "angle", "deg") == pytest.approx([math.pi / 2, -math.pi / 4])
    assert units.to_si(None, "length", "cm") is None
    assert units.db_to_linear(20.0) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        units.unit_factor("length", "mhz")


def test_sweep_grid_validation():
    assert validate_sweep_grid([1, 2, 3]) == []
    assert validate_sweep_grid([3, 2, 1]) == []
    assert validate_sweep_grid([]) == ["grid must not be empty"]
    assert "grid must be strictly monotone" in validate_sweep_grid([1, 1, 2])
    assert "grid values must be integers" in validate_sweep_grid([1.5, 2], integer=True)
    assert "grid values must be finite" in validate_sweep_grid([1.0, math.inf])


def test_choice_validation():
    assert validate_choices(["PSL"], ["PSL", "SQL"], "regime") == []
    assert validate_choices([], ["PSL"], "regime") == ["at least one regime is required"]
    assert "duplicate regime entries" in validate_choices(["PSL", "PSL"], ["PSL"], "regime")


def test_scene_template_validation():
    assert validate_scene_template(2, 8, (-1.0, 1.0), 0.1) == []
    assert validate_scene_template(8, 8, (-1.0, 1.0), 0.1)
    assert validate_scene_template(3, 8, (-0.1, 0.1), 0.2)
    assert validate_scene_template(2, 8, (-1.0, 1.0), 0.1, doas=(0.2, 0.2))


def test_validation_report():
    report = ValidationReport()
    report.add_warning("many excluded", location="raq_esprit")
    report.extend(["bad value"])
    assert not report.is_valid
    assert report.to_dict() == {"errors": ["bad value"], "warnings": ["raq_esprit: many excluded"], "info": []}
