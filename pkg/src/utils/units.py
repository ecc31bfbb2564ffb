"""
Unit Suffix Module
===================
Parsing of unit-suffixed configuration keys (e.g. ``omega_p_mhz``,
``cell_length_cm``) and conversion of their values to SI.
"""
import math
import re
from typing import Any, Dict, Optional, Tuple

import scipy.constants as const

# Longer suffixes first so "mhz" wins over "hz" and "cm3" over "cm"
UNIT_SUFFIXES = (
    "ghz", "mhz", "khz", "hz",
    "dbm", "db",
    "cm3", "m3", "cm2", "m2",
    "nm", "um", "mm", "cm", "m",
    "ea0", "vpm",
    "deg", "rad",
    "mw", "uw", "w",
    "k",
)
UNIT_KEY_PATTERN = r'^(?P<name>[a-z][a-z0-9_]*?)_(?P<unit>' + '|'.join(UNIT_SUFFIXES) + r')$'
_UNIT_KEY_RE = re.compile(UNIT_KEY_PATTERN)

BOHR_DIPOLE = const.e * const.physical_constants["Bohr radius"][0]

# dimension -> {suffix: factor to SI}
CONVERSIONS: Dict[str, Dict[str, float]] = {
    # Angular rates are written as f = omega / 2 pi
    "angular_rate": {"hz": 2 * math.pi, "khz": 2 * math.pi * 1e3, "mhz": 2 * math.pi * 1e6, "ghz": 2 * math.pi * 1e9},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "area": {"m2": 1.0, "cm2": 1e-4},
    "density": {"m3": 1.0, "cm3": 1e6},
    "dipole": {"ea0": BOHR_DIPOLE},
    "field": {"vpm": 1.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180},
    "power": {"w": 1.0, "mw": 1e-3, "uw": 1e-6},
    "power_dbm": {"dbm": 1.0},
    "level_db": {"db": 1.0},
    "temperature": {"k": 1.0},
}


def parse_unit_key(key: str) -> Tuple[str, Optional[str]]:
    """
    Split a config key into (quantity name, unit suffix).

    Args:
        key: Key such as 'omega_p_mhz'

    Returns:
        ('omega_p', 'mhz'), or (key, None) without a recognised suffix
    """
    match = _UNIT_KEY_RE.match(key)
    if match:
        return match.group('name'), match.group('unit')
    return key, None


def unit_factor(dimension: str, unit: str) -> float:
    """
    SI factor of a suffix for a dimension.

    Raises:
        ValueError: If the suffix does not belong to the dimension
    """
    factors = CONVERSIONS.get(dimension, {})
    if unit not in factors:
        allowed = ", ".join(sorted(factors)) or "none"
        raise ValueError(f"unit '_{unit}' is not a {dimension} unit (allowed: {allowed})")
    return factors[unit]


def to_si(value: Any, dimension: str, unit: str) -> Any:
    """Convert a number (or nested list of numbers) to SI; None passes through."""
    if value is None:
        return None
    factor = unit_factor(dimension, unit)
    if isinstance(value, (list, tuple)):
        return [to_si(v, dimension, unit) for v in value]
    return float(value) * factor


def db_to_linear(value_db: float) -> float:
    """Power ratio from decibels."""
    return 10 ** (value_db / 10)
