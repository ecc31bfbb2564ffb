"""
Estimators Module
==================
DOA estimation on RAQ-ULA snapshots: least-squares ESPRIT with and without
the LO mismatch correction, a grid plus coordinate-ascent ML search, and the
asymptotic ML error and CRLB.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from ..models.models import ArrayGeometry, SnapshotMatrix, TargetScene
from .arraymodel import (
    echo_amplitudes,
    lo_mismatch_matrix,
    split_groups,
    steering_derivative,
    steering_matrix,
)
from .exceptions import InvalidInputError, InvalidSceneError, NumericalFailureError
from .numkernel import RANK_RTOL, eig_general, numerical_rank, pinv, svd

logger = logging.getLogger(__name__)

# arcsin arguments beyond 1 + this are reported as off-manifold
CLAMP_TOLERANCE = 1e-6

# Smallest-to-largest eigenvalue ratio below which the bound matrix is singular
FISHER_RTOL = 1e-15


@dataclass
class DoaEstimate:
    """Sorted DOA estimates with diagnostics."""
    doas: Tuple[float, ...]
    method: str
    eigenvalues: Tuple[complex, ...] = ()
    converged: bool = True
    objective_history: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def k_targets(self) -> int:
        return len(self.doas)


@dataclass
class SubspaceDecomposition:
    """Signal subspace of the stacked two-group snapshot matrix."""
    u1: np.ndarray
    u2: np.ndarray
    singulars: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.u1, self.u2])


@dataclass(frozen=True)
class MlSearchOptions:
    """Grid and refinement settings of the ML search."""
    grid_step: float = math.radians(0.5)
    xtol: float = 1e-4
    max_iter: int = 50
    rtol: float = 1e-12
    max_targets: int = 3


def signal_subspace(y_stacked: np.ndarray, k: int) -> SubspaceDecomposition:
    """
    Top-K left singular vectors of [Y1; Y2], split per group.

    Raises:
        InvalidInputError: If K is out of range for the data shape
    """
    rows, n = y_stacked.shape
    if rows % 2:
        raise InvalidInputError(f"Stacked matrix needs an even row count, got {rows}")
    m_minus_1 = rows // 2
    if not 1 <= k <= m_minus_1:
        raise InvalidInputError(f"Need 1 <= K < M, got K={k}, M={m_minus_1 + 1}")
    if k > n:
        raise InvalidInputError(f"Need N >= K, got N={n}, K={k}")

    u, s, _ = svd(y_stacked)
    signal = u[:, :k]
    return SubspaceDecomposition(u1=signal[:m_minus_1], u2=signal[m_minus_1:], singulars=s)


def _esprit(
    y1: np.ndarray, y2: np.ndarray, k: int, geom: ArrayGeometry, vartheta: float, method: str
) -> DoaEstimate:
    if y1.shape != y2.shape:
        raise InvalidInputError(f"Group shapes differ: {y1.shape} vs {y2.shape}")
    if y1.shape[0] != geom.m_sensors - 1:
        raise InvalidInputError(f"Groups need M-1={geom.m_sensors - 1} rows, got {y1.shape[0]}")

    sub = signal_subspace(np.vstack([y1, y2]), k)
    psi = pinv(sub.u1) @ sub.u2
    values, _ = eig_general(psi)

    kd = geom.wavenumber_spacing
    corrected = values * np.exp(1j * kd * math.sin(vartheta))
    arg = np.angle(corrected) / kd

    warnings = []
    overflow = np.abs(arg) > 1 + CLAMP_TOLERANCE
    if np.any(overflow):
        warnings.append(
            f"{int(np.sum(overflow))} eigenvalue(s) off the array manifold (|arg| up to {np.max(np.abs(arg)):.6f})"
        )
        logger.debug(warnings[-1])

    doas = np.arcsin(np.clip(arg, -1.0, 1.0))
    order = np.argsort(doas)
    return DoaEstimate(
        doas=tuple(float(d) for d in doas[order]),
        method=method,
        eigenvalues=tuple(complex(v) for v in values[order]),
        warnings=warnings,
    )


def raq_esprit(
    y1: np.ndarray, y2: np.ndarray, k: int, geom: ArrayGeometry, vartheta: float
) -> DoaEstimate:
    """
    LS-ESPRIT with the LO mismatch correction e^{+j (2 pi / lambda) d sin(vartheta)}.

    Args:
        y1: Snapshots of sensors 1..M-1
        y2: Snapshots of sensors 2..M
        k: Number of targets
        geom: Array geometry
        vartheta: LO direction of arrival (rad)

    Returns:
        DoaEstimate with ascending DOAs
    """
    return _esprit(y1, y2, k, geom, vartheta, "raq_esprit")


def classical_esprit(y1: np.ndarray, y2: np.ndarray, k: int, geom: ArrayGeometry) -> DoaEstimate:
    """LS-ESPRIT without mismatch correction."""
    return _esprit(y1, y2, k, geom, 0.0, "classical_esprit")


def esprit_from_snapshots(
    snapshots: SnapshotMatrix, k: int, geom: ArrayGeometry, vartheta: Optional[float]
) -> DoaEstimate:
    """Run RAQ-ESPRIT (vartheta given) or classical ESPRIT (vartheta None) on M x N data."""
    y1, y2 = split_groups(snapshots.y)
    if vartheta is None:
        return classical_esprit(y1, y2, k, geom)
    return raq_esprit(y1, y2, k, geom, vartheta)


def ml_objective(
    doas: Sequence[float], r_y: np.ndarray, geom: ArrayGeometry, vartheta: float = 0.0
) -> float:
    """Tr(P R_y) with P the projector onto the columns of D A(theta)."""
    a = steering_matrix(doas, geom)
    u, s, _ = svd(a)
    q = lo_mismatch_matrix(vartheta, geom) @ u[:, :numerical_rank(s)]
    return float(np.real(np.trace(q.conj().T @ r_y @ q)))


def _ml_grid(step: float) -> np.ndarray:
    count = int(math.floor(math.pi / step))
    grid = -math.pi / 2 + step * np.arange(1, count + 1)
    return grid[grid < math.pi / 2]


def raq_ml(
    y: SnapshotMatrix,
    k: int,
    geom: ArrayGeometry,
    vartheta: float,
    opts: Optional[MlSearchOptions] = None,
) -> DoaEstimate:
    """
    Maximize Tr(P R_y) over K DOAs.

    Sequential grid initialization, then coordinate ascent: each coordinate
    is scanned on the grid and refined with a bounded scalar search to
    opts.xtol. Steps that would lower the objective are rejected, so the
    recorded history is non-decreasing.

    Raises:
        InvalidInputError: If K is out of range
    """
    opts = opts or MlSearchOptions()
    if not 1 <= k < geom.m_sensors:
        raise InvalidInputError(f"Need 1 <= K < M, got K={k}, M={geom.m_sensors}")
    if k > opts.max_targets:
        logger.warning(f"ML search with K={k} exceeds the documented limit K <= {opts.max_targets}")

    r_y = y.sample_covariance()
    grid = _ml_grid(opts.grid_step)

    def objective(doas: Sequence[float]) -> float:
        return ml_objective(doas, r_y, geom, vartheta)

    # Sequential initialization
    doas: List[float] = []
    for _ in range(k):
        scores = [objective(doas + [g]) for g in grid]
        doas.append(float(grid[int(np.argmax(scores))]))

    best = objective(doas)
    history = [best]
    converged = False
    for iteration in range(opts.max_iter):
        previous = best
        for i in range(k):
            others = doas[:i] + doas[i + 1:]
            scores = [objective(others[:i] + [g] + others[i:]) for g in grid]
            start = float(grid[int(np.argmax(scores))])
            lo = max(start - opts.grid_step, -math.pi / 2)
            hi = min(start + opts.grid_step, math.pi / 2)
            res = scipy.optimize.minimize_scalar(
                lambda t: -objective(others[:i] + [t] + others[i:]),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": opts.xtol},
            )
            candidate = float(res.x) if -res.fun >= max(scores) else start
            value = objective(others[:i] + [candidate] + others[i:])
            if value >= best:
                doas[i] = candidate
                best = value
        history.append(best)
        if best - previous <= opts.rtol * max(abs(best), 1e-300):
            converged = True
            logger.debug(f"ML search converged after {iteration + 1} sweeps")
            break

    warnings = [] if converged else [f"ML search hit the iteration cap ({opts.max_iter})"]
    return DoaEstimate(
        doas=tuple(sorted(doas)),
        method="raq_ml",
        converged=converged,
        objective_history=history,
        warnings=warnings,
    )


def expected_source_covariance(scene: TargetScene, geom: ArrayGeometry) -> np.ndarray:
    """diag(E|s_k|^2) on the RAQ field-amplitude scale."""
    return np.diag(echo_amplitudes(scene, geom, field_units=True) ** 2).astype(complex)


def _bound_matrices(
    scene: TargetScene, geom: ArrayGeometry, r_s: np.ndarray, vartheta: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = scene.k_targets
    if not 1 <= k < geom.m_sensors:
        raise InvalidSceneError(f"Need 1 <= K < M, got K={k}, M={geom.m_sensors}")
    if r_s.shape != (k, k):
        raise InvalidInputError(f"R_s must be {k}x{k}, got {r_s.shape}")
    if numerical_rank(svd(r_s)[1]) < k:
        raise InvalidSceneError("Source covariance R_s is singular")

    a = steering_matrix(scene.doas, geom)
    a_dot = steering_derivative(scene.doas, geom)
    d = lo_mismatch_matrix(vartheta, geom)
    gram = a.conj().T @ a
    if numerical_rank(svd(gram)[1]) < k:
        raise InvalidSceneError("A^H A is singular (coincident DOAs)")
    gram_inv = pinv(gram)

    da = d @ a
    projector = da @ gram_inv @ da.conj().T
    complement = np.eye(geom.m_sensors) - projector
    h = a_dot.conj().T @ d.conj().T @ complement @ d @ a_dot
    return h, np.real(h * r_s.T), gram_inv


def _fisher_inverse(fisher: np.ndarray) -> np.ndarray:
    """
    Inverse of the symmetric bound matrix through its eigenvalues.

    Ill-conditioned matrices (targets near endfire or close in sin(theta))
    still invert; only a matrix that is not positive definite is rejected.
    """
    values, vectors = scipy.linalg.eigh(0.5 * (fisher + fisher.T))
    if not np.all(np.isfinite(values)) or values[0] <= FISHER_RTOL * max(values[-1], 0.0):
        raise InvalidSceneError("Re(H o R_s^T) is singular")
    if values[0] < RANK_RTOL * values[-1]:
        logger.debug(f"Bound matrix condition number {values[-1] / values[0]:.3e}")
    return (vectors / values) @ vectors.T


def crlb(
    scene: TargetScene,
    geom: ArrayGeometry,
    varpi: float,
    r_s: Optional[np.ndarray] = None,
    vartheta: float = 0.0,
) -> float:
    """
    CRLB varpi Tr([Re(H o R_s^T)]^{-1}), summed over targets (rad^2).

    The sensor response enters only through varpi: on the field scale of
    R_s the gain rho and the factor Phi cancel against sigma^2. The LO
    direction vartheta sets D.

    Args:
        scene: Target scene (DOAs)
        geom: Array geometry
        varpi: Noise coefficient on the R_s scale
        r_s: Source covariance (defaults to the expected one of the scene)
        vartheta: LO direction setting D

    Raises:
        InvalidSceneError: On singular R_s, A^H A or inner matrix
    """
    if math.isinf(varpi):
        return math.inf
    r_s = expected_source_covariance(scene, geom) if r_s is None else np.asarray(r_s, dtype=complex)
    _, fisher, _ = _bound_matrices(scene, geom, r_s, vartheta)
    return float(varpi * np.trace(_fisher_inverse(fisher)))


def ml_asymptotic_error(
    scene: TargetScene,
    geom: ArrayGeometry,
    varpi: float,
    n_samples: int,
    r_s: Optional[np.ndarray] = None,
    vartheta: float = 0.0,
) -> float:
    """
    Asymptotic multi-target ML error (rad^2).

    varpi Tr(F^{-2} Re(H o (R_s W R_s)^T)) with F = Re(H o R_s^T) and
    W = R_s^{-1} + 2 N varpi R_s^{-1} (A^H A)^{-1} R_s^{-1}. As with crlb
    the sensor response is folded into varpi.
    """
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be >= 1, got {n_samples}")
    if math.isinf(varpi):
        return math.inf
    r_s = expected_source_covariance(scene, geom) if r_s is None else np.asarray(r_s, dtype=complex)
    h, fisher, gram_inv = _bound_matrices(scene, geom, r_s, vartheta)

    # R_s W R_s = R_s + 2 N varpi (A^H A)^{-1}
    inner = r_s + 2 * n_samples * varpi * gram_inv
    spread = np.real(h * inner.T)
    fisher_inv = _fisher_inverse(fisher)
    value = float(varpi * np.trace(fisher_inv @ fisher_inv @ spread))
    if not math.isfinite(value):
        raise NumericalFailureError("ML error evaluation produced a non-finite value")
    return value
