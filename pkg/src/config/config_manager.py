"""
Configuration Manager Module
=============================
Loads experiment configuration files, merges them over the built-in
defaults and resolves the output directory.
"""
import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from ..utils.units import parse_unit_key

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "RAQ_DOA_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"

# Default configuration values. Physical keys carry a unit suffix.
# Entries marked "stand-in" are not pinned by the source model and only
# need to be physically plausible; tests pin their own values.
DEFAULT_CONFIG: Dict[str, Any] = {
    "schema_version": "1.0",
    "atomic": {
        "gamma2_mhz": 5.2,              # stand-in (Cs D2 natural linewidth)
        "gamma3_mhz": 0.0,
        "gamma4_mhz": 0.0,
        "gamma_mhz": 0.0,
        "gamma_c_mhz": 0.0,
        "gamma2_total_mhz": None,       # defaults to gamma2
        "mu12_ea0": 2.59,               # stand-in
        "mu34_ea0": 1443.0,             # stand-in
        "n0_cm3": 4.89e10,
        "upsilon": 0.01,
        "cell_length_cm": 10.0,
    },
    "optics": {
        "omega_p_mhz": 1.0,             # stand-in
        "omega_c_mhz": 10.0,            # stand-in
        "delta_p_mhz": -0.9133,
        "delta_c_mhz": 1.8090,
        "delta_l_mhz": -0.0075,
        "lambda_p_nm": 852.35,
        "probe_amp_in_vpm": 10.0,       # stand-in, about 0.15 uW over a 1 mm FWHM beam
        "fwhm_p_mm": 1.0,
        "beam_radius_mm": 0.5,
        "probe_phase_in_rad": 0.0,
    },
    "lo": {
        "omega_l_mhz": 1.784,           # stand-in, transparency point of the pinned detunings
        "f_l_ghz": 6.94575,
        "theta_l1_deg": 60.0,
        "vartheta_deg": 20.0,           # stand-in
    },
    "photodetector": {
        "eta": 0.8,                     # stand-in
        "lna_gain_db": 20.0,            # stand-in
        "local_beam_power_mw": 1.0,     # stand-in
        "local_beam_phase_rad": None,   # None selects the PSL-optimal phase
        "psl_power_unit": "photon_flux",
    },
    "array": {
        "m_sensors": 10,
        "carrier_freq_ghz": 6.9458,
        "spacing_m": None,              # None gives half a carrier wavelength
    },
    "scene": {
        "k_targets": 5,
        "reflected_power_dbm": 23.0,
        "doa_range_deg": [-80.0, 80.0],  # kept off endfire, see the doa sweep for +-90
        "min_separation_deg": 1.0,
        "disk_radius_m": 500.0,
        "disk_center_m": 1500.0,
        "k0_db": -30.0,
        "pathloss_exponent": 2.0,
        "u0_m": 1.0,
        "bandwidth_khz": 100.0,
        "waveform": "gaussian",
        "effective_aperture_m2": None,  # None gives lambda^2 / (4 pi)
        "doas_deg": None,
        "distances_m": None,
    },
    "classical": {
        "noise_figure_db": 7.0,         # stand-in
        "antenna_gain_db": 20.0,        # stand-in, with the noise figure sets the baseline SNR
        "rx_gain_db": 0.0,
        "temperature_k": 290.0,
    },
    "experiment": {
        "regimes": ["PSL", "SQL", "CLASSICAL"],
        "estimators": ["raq_esprit", "classical_esprit", "ml_bound", "crlb"],
        "trials": 500,
        "master_seed": 0,
        "n_samples": 50,
        "workers": 1,
        "unbounded_policy": "inf",
        "varphi_deg": None,
        "ml_grid_step_deg": 0.5,
        "noise_variance_override": {},
    },
    # Grids are in display units: dBm, counts, degrees
    "sweeps": {
        "power": {"variable": "reflected_power", "grid": [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0]},
        "sensors": {"variable": "m_sensors", "grid": [6, 8, 10, 12, 14, 16]},
        "targets": {"variable": "k_targets", "grid": [1, 2, 3, 4, 5, 6]},
        "samples": {"variable": "n_samples", "grid": [10, 20, 50, 100, 200, 500]},
        "doa": {"variable": "doa_range", "grid": [15.0, 30.0, 45.0, 60.0, 75.0, 90.0]},
        "phase": {
            "variable": "varphi",
            "grid": [-180.0, -150.0, -120.0, -90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0],
        },
    },
    "physics": {
        "omega_rf_max_mhz": 4.0,
        "omega_rf_points": 41,
        "detunings_mhz": [[-0.9133, 1.8090, -0.0075], [0.0, 0.0, 0.0]],
    },
    "rational": None,
}


class ConfigValidationError(Exception):
    """Raised when configuration loading or validation fails."""
    pass


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Merge override over base; nested dicts merge, everything else replaces.

    Returns:
        New dictionary (inputs are not modified)
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        name, unit = parse_unit_key(key)
        if unit is not None:
            # omega_p_khz in the override replaces omega_p_mhz in the base
            for other in [k for k in merged if k != key and parse_unit_key(k)[0] == name and parse_unit_key(k)[1]]:
                del merged[other]
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def read_json(path: Path) -> Dict[str, Any]:
    """
    Read a JSON object from disk.

    Raises:
        ConfigValidationError: On unreadable files, syntax errors (with line
            and column) or a non-object top level
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigValidationError(f"Cannot read config '{path}': {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigValidationError(f"{path}: top level must be a JSON object")
    return data


class ConfigManager:
    """
    Holds one resolved configuration: the defaults with a file merged over
    them and any command-line overrides applied.

    A run manifest is accepted as a config file; its 'resolved_config'
    section is used.
    """

    def __init__(self, config_path: Optional[Path] = None):
        """
        Initialize ConfigManager.

        Args:
            config_path: Optional config or manifest file
        """
        self._config_path = Path(config_path) if config_path else None
        self._config: Dict[str, Any] = copy.deepcopy(DEFAULT_CONFIG)
        if self._config_path is not None:
            self.load_config()

    @property
    def config_path(self) -> Optional[Path]:
        return self._config_path

    def load_config(self) -> Dict[str, Any]:
        """
        Load the config file and merge it over the defaults.

        Raises:
            ConfigValidationError: If the file cannot be read or parsed
        """
        data = read_json(self._config_path)
        if "resolved_config" in data:
            logger.info(f"Replaying manifest {self._config_path}")
            data = data["resolved_config"]
            if not isinstance(data, dict):
                raise ConfigValidationError(f"{self._config_path}: 'resolved_config' must be an object")
        self._config = deep_merge(DEFAULT_CONFIG, data)
        logger.debug(f"Loaded config {self._config_path}")
        return self._config

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a value by dotted key, e.g. 'experiment.trials'.
        """
        node: Any = self._config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """Set a value by dotted key, creating sections as needed."""
        parts = key.split(".")
        node = self._config
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def resolved(self) -> Dict[str, Any]:
        """Deep copy of the full configuration with all defaults expanded."""
        return copy.deepcopy(self._config)

    def save_config(self, path: Path) -> Path:
        """Write the resolved configuration as JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(self._config, f, indent=2)
        return path


def get_output_dir(cli_value: Optional[str] = None) -> Path:
    """Output directory: command line, then RAQ_DOA_OUTPUT_DIR, then ./results."""
    if cli_value:
        return Path(cli_value)
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)
