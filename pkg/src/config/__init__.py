"""
Configuration module for RAQ-DOA.
"""

from .config_manager import (
    ConfigManager,
    ConfigValidationError,
    DEFAULT_CONFIG,
    OUTPUT_DIR_ENV,
    deep_merge,
    get_output_dir,
    read_json,
)

from .experiment_config import (
    PhysicsGrid,
    SWEEP_NAMES,
    build_experiment_config,
    load_experiment_config,
    physics_grid,
    validate_config,
)

__all__ = [
    # Loading
    'ConfigManager',
    'ConfigValidationError',
    'DEFAULT_CONFIG',
    'OUTPUT_DIR_ENV',
    'deep_merge',
    'get_output_dir',
    'read_json',
    # Experiment config
    'PhysicsGrid',
    'SWEEP_NAMES',
    'build_experiment_config',
    'load_experiment_config',
    'physics_grid',
    'validate_config',
]
