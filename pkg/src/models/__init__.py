"""
Data models for RAQ-DOA.
"""

from .models import (
    Regime,
    AtomicSystem,
    OpticalRfConfig,
    RationalCoefficients,
    PhotodetectorConfig,
    LoConfig,
    SensorResponse,
    ArrayGeometry,
    PathLoss,
    TargetScene,
    SceneTemplate,
    ClassicalReceiverConfig,
    SnapshotMatrix,
    SweepSpec,
    ExperimentConfig,
)

__all__ = [
    'Regime',
    'AtomicSystem',
    'OpticalRfConfig',
    'RationalCoefficients',
    'PhotodetectorConfig',
    'LoConfig',
    'SensorResponse',
    'ArrayGeometry',
    'PathLoss',
    'TargetScene',
    'SceneTemplate',
    'ClassicalReceiverConfig',
    'SnapshotMatrix',
    'SweepSpec',
    'ExperimentConfig',
]
