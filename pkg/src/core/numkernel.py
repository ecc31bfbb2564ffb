"""
Numerical Kernel Module
========================
Dense complex linear algebra used by the steady-state solver and the
subspace estimators: SVD, general eigendecomposition, pseudoinverse and the
trace-constrained null-space solve for Lindblad superoperators.
"""
import logging
import math
from typing import Tuple

import numpy as np
import scipy.linalg

from .exceptions import (
    DegenerateSystemError,
    InvalidInputError,
    NumericalFailureError,
)

logger = logging.getLogger(__name__)

# Relative singular-value threshold for every rank decision
RANK_RTOL = 1e-10


def as_complex_matrix(m, name: str = "m") -> np.ndarray:
    """
    Validate and convert an input to a finite 2-D complex array.

    Raises:
        InvalidInputError: On wrong dimensionality, empty axes or non-finite entries
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} has a zero dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return arr


def svd(m) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Economy-size singular value decomposition.

    Args:
        m: Complex matrix (rows x cols)

    Returns:
        (U, s, V) with m = U @ diag(s) @ V^H, s sorted descending

    Raises:
        InvalidInputError: On invalid input
        NumericalFailureError: If both LAPACK drivers fail
    """
    a = as_complex_matrix(m)
    try:
        u, s, vh = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.debug("gesdd did not converge, retrying with gesvd")
        try:
            u, s, vh = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"SVD failed: {e}") from e
    return u, s, vh.conj().T


def numerical_rank(s: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Count singular values above rtol * max(s)."""
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def eig_general(m) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a general square complex matrix.

    Returns:
        (values, vectors) with unit-norm eigenvectors in the columns

    Raises:
        InvalidInputError: If m is not square
        NumericalFailureError: On non-convergence or non-finite output
    """
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"eig_general needs a square matrix, got {a.shape}")
    try:
        values, vectors = scipy.linalg.eig(a)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"Eigendecomposition failed: {e}") from e
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vectors))):
        raise NumericalFailureError("Eigendecomposition produced non-finite values")
    norms = np.linalg.norm(vectors, axis=0)
    norms[norms == 0.0] = 1.0
    return values, vectors / norms


def pinv(m) -> np.ndarray:
    """
    Moore-Penrose pseudoinverse via SVD.

    Singular values at or below RANK_RTOL * sigma_max are treated as zero;
    the zero matrix maps to the zero matrix of transposed shape.
    """
    a = as_complex_matrix(m)
    u, s, v = svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=complex)
    keep = s > RANK_RTOL * s[0]
    return (v[:, keep] / s[keep]) @ u[:, keep].conj().T


def trace_row(n: int) -> np.ndarray:
    """Row vector t with t @ vec(rho) = trace(rho) for row-major vec."""
    t = np.zeros(n * n, dtype=complex)
    t[:: n + 1] = 1.0
    return t


def solve_steady_null(l) -> np.ndarray:
    """
    Steady state of a vectorized Lindbladian.

    Solves [l; trace_row] x = [0; 1] in the least-squares sense (SVD-based
    LAPACK driver), then Hermitizes and renormalizes the density matrix.

    Args:
        l: n^2 x n^2 superoperator acting on row-major vec(rho)

    Returns:
        vec(rho) of length n^2 with trace exactly 1

    Raises:
        InvalidInputError: If l is not square with a perfect-square size
        DegenerateSystemError: If the null space of l is not one-dimensional
    """
    lv = as_complex_matrix(l, name="l")
    size = lv.shape[0]
    n = math.isqrt(size)
    if lv.shape[1] != size or n * n != size:
        raise InvalidInputError(f"Lindbladian must be n^2 x n^2, got {lv.shape}")

    s = scipy.linalg.svdvals(lv)
    nullity = size - numerical_rank(s)
    if nullity != 1:
        raise DegenerateSystemError(
            f"Lindbladian null space has dimension {nullity} (expected 1)"
        )

    scale = s[0] if s[0] > 0 else 1.0
    lv = lv / scale
    augmented = np.vstack([lv, trace_row(n)[np.newaxis, :]])
    rhs = np.zeros(size + 1, dtype=complex)
    rhs[-1] = 1.0
    x, _, _, _ = scipy.linalg.lstsq(augmented, rhs, lapack_driver="gelsd")

    rho = x.reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real

    residual = np.linalg.norm(lv @ rho.reshape(-1))
    if residual > 1e-8:
        logger.warning(f"Steady-state residual {residual:.3e} exceeds tolerance")
    return rho.reshape(-1)
