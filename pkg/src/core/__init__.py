"""
Core computation for RAQ-DOA.
"""

from .exceptions import (
    RaqDoaError,
    InvalidInputError,
    InvalidSceneError,
    NumericalFailureError,
    DegenerateSystemError,
    UndefinedPhaseError,
    UnboundedNoiseError,
)
from .cache_manager import CacheManager, CacheStats, get_susceptibility_cache
from .numkernel import svd, eig_general, pinv, numerical_rank, solve_steady_null
from .atomphys import (
    susceptibility,
    susceptibility_derivative,
    rational_susceptibility,
    rational_derivative,
    fit_rational_coefficients,
    lindblad_steady_state,
    probe_output,
    responsivity,
    detection_phase,
    psl_optimal_local_phase,
)
from .transducer import (
    FrontEndState,
    evaluate_front_end,
    sensor_gain,
    sensor_phase,
    noise_coefficient,
    noise_power,
)
from .arraymodel import (
    steering_vector,
    steering_matrix,
    lo_mismatch_matrix,
    path_loss_db,
    draw_scene,
    synthesize_snapshots,
    synthesize_classical_snapshots,
)
from .estimators import (
    DoaEstimate,
    MlSearchOptions,
    raq_esprit,
    classical_esprit,
    raq_ml,
    crlb,
    ml_asymptotic_error,
)
from .harness import (
    ESTIMATORS,
    SweepRow,
    SweepTable,
    TrialResult,
    mse,
    run_trial,
    run_sweep,
    fold_ratio,
    field_noise_coefficient,
)

__all__ = [
    # Exceptions
    'RaqDoaError',
    'InvalidInputError',
    'InvalidSceneError',
    'NumericalFailureError',
    'DegenerateSystemError',
    'UndefinedPhaseError',
    'UnboundedNoiseError',
    # Cache
    'CacheManager',
    'CacheStats',
    'get_susceptibility_cache',
    # Linear algebra
    'svd',
    'eig_general',
    'pinv',
    'numerical_rank',
    'solve_steady_null',
    # Atomic physics
    'susceptibility',
    'susceptibility_derivative',
    'rational_susceptibility',
    'rational_derivative',
    'fit_rational_coefficients',
    'lindblad_steady_state',
    'probe_output',
    'responsivity',
    'detection_phase',
    'psl_optimal_local_phase',
    # Transducer
    'FrontEndState',
    'evaluate_front_end',
    'sensor_gain',
    'sensor_phase',
    'noise_coefficient',
    'noise_power',
    # Array model
    'steering_vector',
    'steering_matrix',
    'lo_mismatch_matrix',
    'path_loss_db',
    'draw_scene',
    'synthesize_snapshots',
    'synthesize_classical_snapshots',
    # Estimators
    'DoaEstimate',
    'MlSearchOptions',
    'raq_esprit',
    'classical_esprit',
    'raq_ml',
    'crlb',
    'ml_asymptotic_error',
    # Harness
    'ESTIMATORS',
    'SweepRow',
    'SweepTable',
    'TrialResult',
    'mse',
    'run_trial',
    'run_sweep',
    'fold_ratio',
    'field_noise_coefficient',
]
