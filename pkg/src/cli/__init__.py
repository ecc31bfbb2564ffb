"""
Command-line front end for RAQ-DOA.
"""

from .main import main, cmd_sweep, cmd_physics, physics_rows, build_parser
from .output import (
    SWEEP_COLUMNS,
    PHYSICS_COLUMNS,
    format_value,
    write_sweep_csv,
    write_physics_csv,
    build_manifest,
    write_manifest,
    plot_sweep,
)

__all__ = [
    'main',
    'cmd_sweep',
    'cmd_physics',
    'physics_rows',
    'build_parser',
    'SWEEP_COLUMNS',
    'PHYSICS_COLUMNS',
    'format_value',
    'write_sweep_csv',
    'write_physics_csv',
    'build_manifest',
    'write_manifest',
    'plot_sweep',
]
