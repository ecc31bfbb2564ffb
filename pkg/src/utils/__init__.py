"""
Utility functions for RAQ-DOA.
"""

from .rng import stream_seed, trial_generator
from .units import parse_unit_key, to_si, unit_factor, db_to_linear, CONVERSIONS
from .validators import (
    ValidationReport,
    ValidationMessage,
    Severity,
    validate_sweep_grid,
    validate_choices,
    validate_scene_template,
)

__all__ = [
    # RNG
    'stream_seed',
    'trial_generator',
    # Units
    'parse_unit_key',
    'to_si',
    'unit_factor',
    'db_to_linear',
    'CONVERSIONS',
    # Validators
    'ValidationReport',
    'ValidationMessage',
    'Severity',
    'validate_sweep_grid',
    'validate_choices',
    'validate_scene_template',
]
