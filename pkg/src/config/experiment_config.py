"""
Experiment Configuration Module
================================
Validation of resolved configuration dictionaries and their conversion into
ExperimentConfig instances (all quantities in SI).
"""
import math
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.constants as const

from ..core.arraymodel import WAVEFORMS
from ..core.atomphys import susceptibility_scale
from ..core.harness import ESTIMATORS
from ..core.transducer import UNBOUNDED_POLICIES
from ..models.models import (
    ArrayGeometry,
    AtomicSystem,
    ClassicalReceiverConfig,
    ExperimentConfig,
    LoConfig,
    OpticalRfConfig,
    PathLoss,
    PhotodetectorConfig,
    RationalCoefficients,
    Regime,
    SceneTemplate,
    SweepSpec,
)
from ..utils.units import CONVERSIONS, db_to_linear, parse_unit_key, to_si
from ..utils.validators import validate_choices, validate_scene_template, validate_sweep_grid
from .config_manager import ConfigManager, ConfigValidationError

SWEEP_NAMES = ("power", "sensors", "targets", "samples", "doa", "phase")
INTEGER_SWEEPS = ("m_sensors", "k_targets", "n_samples")

# section -> quantity -> dimension (None: dimensionless, no suffix)
SCHEMA: Dict[str, Dict[str, Optional[str]]] = {
    "atomic": {
        "gamma2": "angular_rate", "gamma3": "angular_rate", "gamma4": "angular_rate",
        "gamma": "angular_rate", "gamma_c": "angular_rate", "gamma2_total": "angular_rate",
        "mu12": "dipole", "mu34": "dipole", "n0": "density", "upsilon": None, "cell_length": "length",
    },
    "optics": {
        "omega_p": "angular_rate", "omega_c": "angular_rate",
        "delta_p": "angular_rate", "delta_c": "angular_rate", "delta_l": "angular_rate",
        "lambda_p": "length", "probe_amp_in": "field", "fwhm_p": "length", "beam_radius": "length",
        "probe_phase_in": "angle",
    },
    "lo": {"omega_l": "angular_rate", "f_l": "frequency", "theta_l1": "angle", "vartheta": "angle"},
    "photodetector": {
        "eta": None, "lna_gain": "level_db", "local_beam_power": "power",
        "local_beam_phase": "angle", "psl_power_unit": None,
    },
    "array": {"m_sensors": None, "carrier_freq": "frequency", "spacing": "length"},
    "scene": {
        "k_targets": None, "reflected_power": "power_dbm", "doa_range": "angle", "min_separation": "angle",
        "disk_radius": "length", "disk_center": "length", "k0": "level_db", "pathloss_exponent": None,
        "u0": "length", "bandwidth": "frequency", "waveform": None, "effective_aperture": "area",
        "doas": "angle", "distances": "length",
    },
    "classical": {
        "noise_figure": "level_db", "antenna_gain": "level_db", "rx_gain": "level_db",
        "temperature": "temperature",
    },
    "experiment": {
        "regimes": None, "estimators": None, "trials": None, "master_seed": None, "n_samples": None,
        "workers": None, "unbounded_policy": None, "varphi": "angle", "ml_grid_step": "angle",
        "noise_variance_override": None,
    },
    "physics": {"omega_rf_max": "angular_rate", "omega_rf_points": None, "detunings": "angular_rate"},
}
FREEFORM_SECTIONS = ("schema_version", "sweeps", "rational")

# Values that may be null
OPTIONAL = {
    ("atomic", "gamma2_total"), ("photodetector", "local_beam_phase"), ("array", "spacing"),
    ("scene", "effective_aperture"), ("scene", "doas"), ("scene", "distances"), ("experiment", "varphi"),
}
INTEGERS = {
    ("array", "m_sensors"), ("scene", "k_targets"), ("experiment", "trials"), ("experiment", "master_seed"),
    ("experiment", "n_samples"), ("experiment", "workers"), ("physics", "omega_rf_points"),
}


class PhysicsGrid(NamedTuple):
    """Omega_RF values and (delta_p, delta_c, delta_l) rows for the physics table (rad/s)."""
    omega_rf: np.ndarray
    detunings: List[Tuple[float, float, float]]


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _normalise_section(section: str, raw: Any, errors: List[str]) -> Dict[str, Any]:
    """Strip unit suffixes and convert to SI, collecting errors."""
    if not isinstance(raw, dict):
        errors.append(f"{section}: must be an object")
        return {}
    spec = SCHEMA[section]
    out: Dict[str, Any] = {}
    for key, value in raw.items():
        where = f"{section}.{key}"
        name, unit = parse_unit_key(key)
        if unit is not None and spec.get(name) is not None:
            if name in out:
                errors.append(f"{where}: '{name}' given twice")
                continue
            if value is None:
                if (section, name) not in OPTIONAL:
                    errors.append(f"{where}: value is required")
                out[name] = None
                continue
            try:
                out[name] = to_si(value, spec[name], unit)
            except (TypeError, ValueError) as e:
                errors.append(f"{where}: {e}")
        elif key in spec and spec[key] is None:
            out[key] = value
        elif key in spec:
            errors.append(f"{where}: missing unit suffix (expected one of "
                          f"{', '.join('_' + u for u in CONVERSIONS[spec[key]])})")
        elif unit is not None and name in spec:
            errors.append(f"{where}: '{name}' is dimensionless, drop the '_{unit}' suffix")
        elif "_" in key and spec.get(key.rsplit("_", 1)[0]) is not None:
            errors.append(f"{where}: unknown unit suffix '_{key.rsplit('_', 1)[1]}'")
        else:
            errors.append(f"{where}: unknown key")
    for name, dimension in spec.items():
        if name not in out and (section, name) not in OPTIONAL and not any(
            e.startswith(f"{section}.") for e in errors
        ):
            errors.append(f"{section}: missing '{name}'" + (f" (with a {dimension} unit suffix)" if dimension else ""))
    for name in list(out):
        value = out[name]
        if (section, name) in INTEGERS and not _is_int(value):
            errors.append(f"{section}.{name}: must be an integer, got {value!r}")
        elif spec.get(name) is None and name in ("upsilon", "eta", "pathloss_exponent") and not _is_number(value):
            errors.append(f"{section}.{name}: must be a number, got {value!r}")
    return out


def _normalise(data: Dict[str, Any], errors: List[str]) -> Dict[str, Dict[str, Any]]:
    for section in data:
        if section not in SCHEMA and section not in FREEFORM_SECTIONS:
            errors.append(f"unknown section '{section}'")
    return {section: _normalise_section(section, data.get(section, {}), errors) for section in SCHEMA}


def _build_models(s: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
    atomic, optics, lo, pd = s["atomic"], s["optics"], s["lo"], s["photodetector"]
    array, scene, classical = s["array"], s["scene"], s["classical"]
    models: Dict[str, Any] = {}
    models["atomic"] = AtomicSystem(
        gamma2=atomic["gamma2"], mu12=atomic["mu12"], mu34=atomic["mu34"], n0=atomic["n0"],
        upsilon=float(atomic["upsilon"]), cell_length=atomic["cell_length"],
        gamma3=atomic["gamma3"], gamma4=atomic["gamma4"], gamma=atomic["gamma"], gamma_c=atomic["gamma_c"],
        gamma2_total=atomic.get("gamma2_total"),
    )
    models["optics"] = OpticalRfConfig(
        omega_p=optics["omega_p"], omega_c=optics["omega_c"], omega_l=lo["omega_l"],
        delta_p=optics["delta_p"], delta_c=optics["delta_c"], delta_l=optics["delta_l"],
        lambda_p=optics["lambda_p"], probe_amp_in=optics["probe_amp_in"], fwhm_p=optics["fwhm_p"],
        beam_radius=optics["beam_radius"], probe_phase_in=optics["probe_phase_in"],
    )
    models["photodetector"] = PhotodetectorConfig(
        eta=float(pd["eta"]),
        lna_gain=db_to_linear(pd["lna_gain"]),
        local_beam_power=pd["local_beam_power"],
        omega_p_angular=2 * math.pi * const.c / optics["lambda_p"] if optics["lambda_p"] > 0 else 0.0,
        local_beam_phase=pd.get("local_beam_phase"),
        psl_power_unit=str(pd["psl_power_unit"]),
    )
    models["lo"] = LoConfig(
        omega_l=lo["omega_l"], f_l=lo["f_l"], theta_l1=lo["theta_l1"], vartheta=lo["vartheta"],
        delta_l=optics["delta_l"],
    )
    models["geometry"] = ArrayGeometry.from_carrier(array["m_sensors"], array["carrier_freq"], array.get("spacing"))
    doas = scene.get("doas")
    distances = scene.get("distances")
    models["scene"] = SceneTemplate(
        k_targets=scene["k_targets"],
        reflected_power_dbm=scene["reflected_power"],
        doa_range=tuple(scene["doa_range"]),
        min_separation=scene["min_separation"],
        disk_radius=scene["disk_radius"],
        disk_center=scene["disk_center"],
        pathloss=PathLoss(k0_db=scene["k0"], exponent=float(scene["pathloss_exponent"]), u0=scene["u0"]),
        bandwidth=scene["bandwidth"],
        waveform=scene["waveform"],
        effective_aperture=scene.get("effective_aperture"),
        doas=tuple(doas) if doas is not None else None,
        distances=tuple(distances) if distances is not None else None,
    )
    models["classical"] = ClassicalReceiverConfig(
        noise_figure_db=classical["noise_figure"], antenna_gain_db=classical["antenna_gain"],
        rx_gain_db=classical["rx_gain"], temperature_k=classical["temperature"],
    )
    return models


def _validate_sweeps(sweeps: Any, errors: List[str]) -> None:
    if not isinstance(sweeps, dict):
        errors.append("sweeps: must be an object")
        return
    for name, entry in sweeps.items():
        if not isinstance(entry, dict) or set(entry) != {"variable", "grid"}:
            errors.append(f"sweeps.{name}: needs exactly 'variable' and 'grid'")
            continue
        if entry["variable"] not in SweepSpec.VARIABLES:
            errors.append(f"sweeps.{name}: unknown variable '{entry['variable']}'")
            continue
        grid = entry["grid"] if isinstance(entry["grid"], list) else []
        for message in validate_sweep_grid(grid, integer=entry["variable"] in INTEGER_SWEEPS):
            errors.append(f"sweeps.{name}: {message}")


def _validate_rational(rational: Any, errors: List[str]) -> None:
    if rational is None:
        return
    if not isinstance(rational, dict):
        errors.append("rational: must be an object or null")
        return
    for key in rational:
        if key not in ("a", "b", "c", "varsigma"):
            errors.append(f"rational.{key}: unknown key")
    for key in ("a", "b", "c"):
        coeffs = rational.get(key)
        if not isinstance(coeffs, list) or len(coeffs) != 3 or not all(_is_number(v) for v in coeffs):
            errors.append(f"rational.{key}: must be three numbers")
    if "varsigma" in rational and rational["varsigma"] is not None and not _is_number(rational["varsigma"]):
        errors.append("rational.varsigma: must be a number")


def _validate_experiment(exp: Dict[str, Any], errors: List[str]) -> None:
    regimes = exp.get("regimes")
    if isinstance(regimes, list):
        errors.extend(f"experiment.regimes: {m}" for m in validate_choices(regimes, [r.value for r in Regime], "regime"))
    else:
        errors.append("experiment.regimes: must be a list")
    estimators = exp.get("estimators")
    if isinstance(estimators, list):
        errors.extend(f"experiment.estimators: {m}" for m in validate_choices(estimators, ESTIMATORS, "estimator"))
    else:
        errors.append("experiment.estimators: must be a list")
    if _is_int(exp.get("trials")) and exp["trials"] < 1:
        errors.append("experiment.trials: must be >= 1")
    if _is_int(exp.get("master_seed")) and not 0 <= exp["master_seed"] < 2 ** 64:
        errors.append("experiment.master_seed: must be an unsigned 64-bit integer")
    if _is_int(exp.get("n_samples")) and exp["n_samples"] < 1:
        errors.append("experiment.n_samples: must be >= 1")
    if _is_int(exp.get("workers")) and exp["workers"] < 1:
        errors.append("experiment.workers: must be >= 1")
    if exp.get("unbounded_policy") not in UNBOUNDED_POLICIES:
        errors.append(f"experiment.unbounded_policy: must be one of {', '.join(UNBOUNDED_POLICIES)}")
    step = exp.get("ml_grid_step")
    if isinstance(step, float) and not 0 < step < math.pi / 2:
        errors.append("experiment.ml_grid_step: must lie in (0, 90) deg")
    override = exp.get("noise_variance_override")
    if not isinstance(override, dict):
        errors.append("experiment.noise_variance_override: must be an object")
    else:
        for regime, value in override.items():
            if regime not in [r.value for r in Regime]:
                errors.append(f"experiment.noise_variance_override: unknown regime '{regime}'")
            elif not _is_number(value) or value <= 0:
                errors.append(f"experiment.noise_variance_override.{regime}: must be a positive number")


def validate_config(data: Dict[str, Any]) -> List[str]:
    """
    Validate a resolved configuration dictionary.

    Returns:
        List of validation error messages (empty if valid).
    """
    errors: List[str] = []
    sections = _normalise(data, errors)
    _validate_sweeps(data.get("sweeps", {}), errors)
    _validate_rational(data.get("rational"), errors)
    if errors:
        return errors

    _validate_experiment(sections["experiment"], errors)
    scene = sections["scene"]
    if scene["waveform"] not in WAVEFORMS:
        errors.append(f"scene.waveform: must be one of {', '.join(WAVEFORMS)}")
    if not isinstance(scene["doa_range"], list) or len(scene["doa_range"]) != 2:
        errors.append("scene.doa_range: must be [low, high]")
        return errors
    for name in ("doas", "distances"):
        if scene.get(name) is not None and not isinstance(scene[name], list):
            errors.append(f"scene.{name}: must be a list or null")
    physics = sections["physics"]
    if _is_int(physics["omega_rf_points"]) and physics["omega_rf_points"] < 2:
        errors.append("physics.omega_rf_points: must be >= 2")
    if physics["omega_rf_max"] <= 0:
        errors.append("physics.omega_rf_max: must be > 0")
    detunings = physics["detunings"]
    if not isinstance(detunings, list) or not all(isinstance(r, list) and len(r) == 3 for r in detunings):
        errors.append("physics.detunings: must be a list of [delta_p, delta_c, delta_l] rows")
    if errors:
        return errors

    models = _build_models(sections)
    for name in ("atomic", "optics", "photodetector", "lo", "geometry"):
        errors.extend(f"{name}: {m}" for m in models[name].validate())
    template = models["scene"]
    errors.extend(
        f"scene: {m}" for m in validate_scene_template(
            template.k_targets, models["geometry"].m_sensors, template.doa_range,
            template.min_separation, template.doas, template.distances,
        )
    )
    if template.bandwidth <= 0:
        errors.append("scene.bandwidth: must be > 0")
    if template.disk_radius < 0 or template.disk_center - template.disk_radius < template.pathloss.u0:
        errors.append("scene: target disk must stay beyond the path-loss reference distance")
    if template.distances is not None and any(d < template.pathloss.u0 for d in template.distances):
        errors.append("scene.distances: must be >= the path-loss reference distance")
    return errors


def build_experiment_config(data: Dict[str, Any], sweep_name: Optional[str] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a resolved configuration dictionary.

    Args:
        data: Resolved configuration (defaults merged)
        sweep_name: Entry of the 'sweeps' section to attach, if any

    Raises:
        ConfigValidationError: Listing every validation problem
    """
    errors = validate_config(data)
    sweeps = data.get("sweeps", {})
    if sweep_name is not None and not errors and sweep_name not in sweeps:
        errors.append(f"sweeps: no sweep named '{sweep_name}'")
    if errors:
        raise ConfigValidationError(
            "Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
        )

    sections = _normalise(data, [])
    models = _build_models(sections)
    exp = sections["experiment"]
    rational = None
    if data.get("rational") is not None:
        r = data["rational"]
        varsigma = r.get("varsigma")
        rational = RationalCoefficients(
            a=tuple(float(v) for v in r["a"]),
            b=tuple(float(v) for v in r["b"]),
            c=tuple(float(v) for v in r["c"]),
            varsigma=susceptibility_scale(models["atomic"]) if varsigma is None else float(varsigma),
        )
    sweep = None
    if sweep_name is not None:
        entry = sweeps[sweep_name]
        sweep = SweepSpec(variable=entry["variable"], grid=tuple(entry["grid"]))

    return ExperimentConfig(
        geometry=models["geometry"],
        scene=models["scene"],
        atomic=models["atomic"],
        optics=models["optics"],
        photodetector=models["photodetector"],
        lo=models["lo"],
        classical=models["classical"],
        rational=rational,
        regimes=tuple(Regime(r) for r in exp["regimes"]),
        estimators=tuple(exp["estimators"]),
        trials=exp["trials"],
        master_seed=exp["master_seed"],
        n_samples=exp["n_samples"],
        sweep=sweep,
        workers=exp["workers"],
        unbounded_policy=exp["unbounded_policy"],
        varphi=exp.get("varphi"),
        noise_variance_override={k: float(v) for k, v in exp["noise_variance_override"].items()},
        ml_grid_step=exp["ml_grid_step"],
    )


def physics_grid(data: Dict[str, Any]) -> PhysicsGrid:
    """
    Omega_RF grid on (0, omega_rf_max] and detuning rows from the 'physics' section.

    Zero is left out: the responsivity and detection phase are undefined there.

    Raises:
        ConfigValidationError: If the configuration is invalid
    """
    errors = validate_config(data)
    if errors:
        raise ConfigValidationError(
            "Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
        )
    physics = _normalise(data, [])["physics"]
    omega_rf = np.linspace(0.0, physics["omega_rf_max"], physics["omega_rf_points"] + 1)[1:]
    rows = [tuple(float(v) for v in row) for row in physics["detunings"]]
    return PhysicsGrid(omega_rf=omega_rf, detunings=rows)


def load_experiment_config(
    config_path: Path,
    sweep_name: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Tuple[ExperimentConfig, ConfigManager]:
    """
    Load a config or manifest file, apply dotted-key overrides and build
    the experiment.

    Returns:
        (ExperimentConfig, ConfigManager holding the resolved dictionary)

    Raises:
        ConfigValidationError: If loading or validation fails
    """
    manager = ConfigManager(config_path)
    for key, value in (overrides or {}).items():
        if value is not None:
            manager.set(key, value)
    return build_experiment_config(manager.resolved(), sweep_name), manager
