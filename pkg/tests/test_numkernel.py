"""Tests for the dense linear-algebra kernel."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core import numkernel
from src.core.atomphys import lindbladian
from src.core.exceptions import DegenerateSystemError, InvalidInputError


def random_complex(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def test_svd_reconstructs_and_sorts():
    rng = np.random.default_rng(1)
    m = random_complex(rng, 6, 4)
    u, s, v = numkernel.svd(m)
    assert_allclose(u @ np.diag(s) @ v.conj().T, m, atol=1e-12)
    assert np.all(np.diff(s) <= 0)
    assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("bad", [np.array([1.0, 2.0]), np.array([[1.0, np.nan]]), np.zeros((0, 3))])
def test_svd_rejects_invalid_input(bad):
    with pytest.raises(InvalidInputError):
        numkernel.svd(bad)


def test_numerical_rank_of_low_rank_product():
    rng = np.random.default_rng(2)
    m = random_complex(rng, 5, 2) @ random_complex(rng, 2, 5)
    _, s, _ = numkernel.svd(m)
    assert numkernel.numerical_rank(s) == 2
    assert numkernel.numerical_rank(np.zeros(3)) == 0


def test_eig_general_unit_vectors():
    rng = np.random.default_rng(3)
    m = random_complex(rng, 4, 4)
    values, vectors = numkernel.eig_general(m)
    assert_allclose(np.linalg.norm(vectors, axis=0), np.ones(4), rtol=1e-12)
    assert_allclose(m @ vectors, vectors * values, atol=1e-10)


def test_eig_general_needs_square_matrix():
    with pytest.raises(InvalidInputError):
        numkernel.eig_general(np.ones((2, 3)))


def test_pinv_matches_numpy():
    rng = np.random.default_rng(4)
    m = random_complex(rng, 5, 3)
    assert_allclose(numkernel.pinv(m), np.linalg.pinv(m), atol=1e-12)


def test_pinv_of_zero_matrix_is_zero_transposed():
    result = numkernel.pinv(np.zeros((2, 3)))
    assert result.shape == (3, 2)
    assert not np.any(result)


def test_trace_row_reads_diagonal():
    rho = np.arange(9, dtype=complex).reshape(3, 3)
    assert numkernel.trace_row(3) @ rho.reshape(-1) == pytest.approx(np.trace(rho))


def test_steady_state_of_pure_decay_is_ground_state():
    gamma = 3.0e7
    lowering = np.array([[0, 1], [0, 0]], dtype=complex) * np.sqrt(gamma)
    sup = lindbladian(np.zeros((2, 2), dtype=complex), [lowering])
    rho = numkernel.solve_steady_null(sup).reshape(2, 2)
    assert_allclose(rho, np.diag([1.0, 0.0]), atol=1e-12)


def test_steady_state_is_hermitian_with_unit_trace():
    h = np.array([[0.0, -0.5e6], [-0.5e6, 2.0e6]], dtype=complex)
    lowering = np.array([[0, 1], [0, 0]], dtype=complex) * np.sqrt(3.0e7)
    rho = numkernel.solve_steady_null(lindbladian(h, [lowering])).reshape(2, 2)
    assert_allclose(rho, rho.conj().T, atol=1e-15)
    assert np.trace(rho) == pytest.approx(1.0)


@pytest.mark.parametrize("shape", [(1, 1), (8, 3), (3, 8), (17, 17), (40, 25), (64, 64)])
def test_svd_reconstructs_across_sizes(shape):
    rng = np.random.default_rng(sum(shape))
    m = random_complex(rng, *shape)
    u, s, v = numkernel.svd(m)
    scale = np.linalg.norm(m, 2)
    assert_allclose(u @ np.diag(s) @ v.conj().T, m, atol=1e-12 * scale)
    assert_allclose(u.conj().T @ u, np.eye(min(shape)), atol=1e-12)
    assert_allclose(v.conj().T @ v, np.eye(min(shape)), atol=1e-12)
    assert np.all(np.diff(s) <= 0)


def test_pinv_satisfies_moore_penrose_on_rank_deficient_matrix():
    rng = np.random.default_rng(6)
    a = random_complex(rng, 7, 3) @ random_complex(rng, 3, 5)
    p = numkernel.pinv(a)
    assert p.shape == (5, 7)
    assert_allclose(a @ p @ a, a, atol=1e-10)
    assert_allclose(p @ a @ p, p, atol=1e-10)
    assert_allclose(a @ p, (a @ p).conj().T, atol=1e-10)
    assert_allclose(p @ a, (p @ a).conj().T, atol=1e-10)


def test_steady_state_of_driven_ladder_is_a_density_matrix():
    ket = np.eye(3, dtype=complex)
    h = (
        np.diag([0.0, -1.0e6, 2.5e6]).astype(complex)
        + 0.8e6 * (np.outer(ket[0], ket[1]) + np.outer(ket[1], ket[0]))
        + 3.0e6 * (np.outer(ket[1], ket[2]) + np.outer(ket[2], ket[1]))
    )
    decays = [np.sqrt(3.0e7) * np.outer(ket[0], ket[1]), np.sqrt(2.0e6) * np.outer(ket[1], ket[2])]
    rho = numkernel.solve_steady_null(lindbladian(h, decays)).reshape(3, 3)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
    assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) >= -1e-12


def test_zero_lindbladian_is_degenerate():
    with pytest.raises(DegenerateSystemError):
        numkernel.solve_steady_null(np.zeros((4, 4)))


def test_non_square_size_is_rejected():
    with pytest.raises(InvalidInputError):
        numkernel.solve_steady_null(np.eye(3))
