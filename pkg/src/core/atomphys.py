"""
Atomic Physics Module
======================
Four-level Rydberg ladder response: Lindblad steady state, susceptibility and
its derivative with respect to the RF Rabi frequency, and the Lambert-Beer
transformation of the probe beam.

Level ordering is |1> (ground), |2> (excited), |3>, |4> (Rydberg pair). The
probe, coupling and RF drives act on |1>-|2>, |2>-|3> and |3>-|4>.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.constants as const
import scipy.linalg

from ..models.models import AtomicSystem, OpticalRfConfig, RationalCoefficients
from .cache_manager import get_susceptibility_cache
from .exceptions import InvalidInputError, NumericalFailureError, UndefinedPhaseError
from .numkernel import solve_steady_null

logger = logging.getLogger(__name__)

N_LEVELS = 4

# Finite-difference settings for chi'
DERIV_REL_STEP = 1e-4
DERIV_TOLERANCE = 1e-8


class ProbeOutput(NamedTuple):
    """Output probe beam after the vapour cell."""
    amp: float
    phase: float
    power: float


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.pi - (math.pi - angle) % (2 * math.pi)
    return wrapped + 2 * math.pi if wrapped <= -math.pi else wrapped


def active_levels(cfg: OpticalRfConfig, omega_rf: float) -> int:
    """
    Number of ladder levels reachable from |1> through nonzero drives.

    Decay only flows downwards, so levels above the first undriven step
    carry no population and are dropped from the solve.
    """
    n = 1
    for rabi in (cfg.omega_p, cfg.omega_c, omega_rf):
        if rabi == 0:
            break
        n += 1
    return n


def ladder_hamiltonian(cfg: OpticalRfConfig, omega_rf: float, n_levels: int = N_LEVELS) -> np.ndarray:
    """Rotating-wave Hamiltonian (units of hbar, rad/s) truncated to n_levels."""
    energies = np.array([
        0.0,
        -cfg.delta_p,
        -(cfg.delta_p + cfg.delta_c),
        -(cfg.delta_p + cfg.delta_c + cfg.delta_l),
    ])
    rabi = np.array([cfg.omega_p, cfg.omega_c, omega_rf])

    h = np.diag(energies[:n_levels]).astype(complex)
    for i in range(n_levels - 1):
        h[i + 1, i] = h[i, i + 1] = -0.5 * rabi[i]
    return h


def collapse_operators(sys: AtomicSystem, n_levels: int = N_LEVELS) -> List[np.ndarray]:
    """Jump operators: cascade decay, transit relaxation to |1>, Rydberg dephasing."""
    ops = []

    def ket_bra(i: int, j: int) -> np.ndarray:
        op = np.zeros((n_levels, n_levels), dtype=complex)
        op[i, j] = 1.0
        return op

    for upper, rate in ((1, sys.gamma2), (2, sys.gamma3), (3, sys.gamma4)):
        if upper < n_levels and rate > 0:
            ops.append(math.sqrt(rate) * ket_bra(upper - 1, upper))
    if sys.gamma > 0:
        for level in range(1, n_levels):
            ops.append(math.sqrt(sys.gamma) * ket_bra(0, level))
    if sys.gamma_c > 0:
        for level in range(2, n_levels):
            ops.append(math.sqrt(sys.gamma_c) * ket_bra(level, level))
    return ops


def lindbladian(h: np.ndarray, jumps: Sequence[np.ndarray]) -> np.ndarray:
    """
    Superoperator acting on row-major vec(rho).

    Uses vec(A rho B) = (A kron B^T) vec(rho).
    """
    n = h.shape[0]
    eye = np.eye(n, dtype=complex)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in jumps:
        cdc = c.conj().T @ c
        sup += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return sup


def lindblad_steady_state(sys: AtomicSystem, cfg: OpticalRfConfig, omega_rf: float) -> np.ndarray:
    """
    Steady-state density matrix of the four-level ladder.

    Args:
        sys: Atomic constants
        cfg: Optical/RF drive parameters
        omega_rf: Rabi frequency on |3>-|4> (rad/s)

    Returns:
        4x4 Hermitian, trace-1 density matrix

    Raises:
        InvalidInputError: If omega_rf < 0
        DegenerateSystemError: If the steady state is not unique
    """
    if omega_rf < 0:
        raise InvalidInputError(f"omega_rf must be >= 0, got {omega_rf}")

    n = active_levels(cfg, omega_rf)
    rho = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    if n == 1:
        rho[0, 0] = 1.0
        return rho

    sup = lindbladian(ladder_hamiltonian(cfg, omega_rf, n), collapse_operators(sys, n))
    rho[:n, :n] = solve_steady_null(sup).reshape(n, n)
    return rho


def susceptibility_scale(sys: AtomicSystem) -> float:
    """varsigma = -2 N0 mu12^2 / (eps0 hbar), in rad/s."""
    return -2 * sys.n0 * sys.mu12 ** 2 / (const.epsilon_0 * const.hbar)


def _rational_parts(coeffs: RationalCoefficients, omega_rf: float) -> Tuple[float, float, float]:
    x = omega_rf ** 2
    a1, a2, a3 = coeffs.a
    b1, b2, b3 = coeffs.b
    c1, c2, c3 = coeffs.c
    return (a1 * x * x + a2 * x + a3, b1 * x * x + b2 * x + b3, c1 * x * x + c2 * x + c3)


def rational_susceptibility(coeffs: RationalCoefficients, omega_rf: float) -> complex:
    """chi = varsigma (A - jB) / C with quadratics in omega_rf^2."""
    a, b, c = _rational_parts(coeffs, omega_rf)
    if c == 0:
        raise NumericalFailureError(f"Rational denominator vanishes at omega_rf={omega_rf}")
    return coeffs.varsigma * complex(a, -b) / c


def rational_derivative(coeffs: RationalCoefficients, omega_l: float) -> complex:
    """Closed-form d chi / d Omega_RF of the rational form at omega_l."""
    a, b, c = _rational_parts(coeffs, omega_l)
    if c == 0:
        raise NumericalFailureError(f"Rational denominator vanishes at omega_l={omega_l}")
    x = omega_l ** 2
    a1, a2, _ = coeffs.a
    b1, b2, _ = coeffs.b
    c1, c2, _ = coeffs.c
    dc = 2 * c1 * x + c2
    re = 2 * coeffs.varsigma * omega_l * ((2 * a1 * x + a2) / c - a * dc / c ** 2)
    im = -2 * coeffs.varsigma * omega_l * ((2 * b1 * x + b2) / c - b * dc / c ** 2)
    return complex(re, im)


def susceptibility(
    sys: AtomicSystem,
    cfg: OpticalRfConfig,
    omega_rf: float,
    rational: Optional[RationalCoefficients] = None,
) -> complex:
    """
    Probe susceptibility chi(omega_rf).

    Computed as varsigma * conj(rho21) / Omega_p from the steady state, which
    keeps imag(chi) >= 0 for an absorbing medium. With rational coefficients
    the rational form is evaluated instead. LME results are memoized.
    """
    if rational is not None:
        return rational_susceptibility(rational, omega_rf)
    if cfg.omega_p <= 0:
        raise InvalidInputError("susceptibility needs a nonzero probe Rabi frequency")

    cache = get_susceptibility_cache()
    key = (sys, cfg, float(omega_rf))
    cached = cache.get(*key)
    if cached is not None:
        return cached

    rho = lindblad_steady_state(sys, cfg, omega_rf)
    chi = complex(susceptibility_scale(sys) * np.conj(rho[1, 0]) / cfg.omega_p)
    cache.set(chi, *key)
    return chi


def susceptibility_derivative(
    sys: AtomicSystem,
    cfg: OpticalRfConfig,
    omega_l: float,
    rational: Optional[RationalCoefficients] = None,
    rel_step: float = DERIV_REL_STEP,
) -> complex:
    """
    d chi / d Omega_RF at omega_l.

    Central difference with relative step rel_step, refined by one Richardson
    extrapolation. In rational mode the closed form is used.

    Raises:
        InvalidInputError: If omega_l <= 0
        NumericalFailureError: If the step underflows
    """
    if omega_l <= 0:
        raise InvalidInputError(f"omega_l must be > 0, got {omega_l}")
    if rational is not None:
        return rational_derivative(rational, omega_l)

    h = rel_step * omega_l
    if h == 0.0 or omega_l + h / 2 == omega_l:
        raise NumericalFailureError(f"Finite-difference step underflow at omega_l={omega_l}")

    def central(step: float) -> complex:
        upper = susceptibility(sys, cfg, omega_l + step)
        lower = susceptibility(sys, cfg, omega_l - step)
        return (upper - lower) / (2 * step)

    coarse = central(h)
    fine = central(h / 2)
    refined = (4 * fine - coarse) / 3

    scale = max(abs(refined), 1e-300)
    if abs(refined - fine) / scale > DERIV_TOLERANCE:
        logger.debug(
            f"chi' Richardson correction {abs(refined - fine) / scale:.2e} above "
            f"{DERIV_TOLERANCE:.0e} at omega_l={omega_l:.4e}"
        )
    return complex(refined)


def fit_rational_coefficients(
    sys: AtomicSystem, cfg: OpticalRfConfig, omega_grid: Sequence[float]
) -> RationalCoefficients:
    """
    Fit the rational susceptibility form to LME samples.

    Linearizes A - u C = 0 and B + w C = 0 (chi/varsigma = u + jw) into a
    homogeneous real system and takes its null vector from the SVD. Omega and
    chi are rescaled before the solve for conditioning.

    Args:
        sys: Atomic constants
        cfg: Optical/RF drive parameters
        omega_grid: At least five distinct nonnegative omega_rf samples (rad/s)

    Returns:
        RationalCoefficients reproducing the samples
    """
    grid = np.unique(np.asarray(omega_grid, dtype=float))
    if grid.size < 5 or np.any(grid < 0):
        raise InvalidInputError("omega_grid needs at least five distinct nonnegative values")

    varsigma = susceptibility_scale(sys)
    z = np.array([susceptibility(sys, cfg, w) for w in grid]) / varsigma
    z_scale = float(np.max(np.abs(z)))
    if z_scale == 0.0:
        raise NumericalFailureError("Susceptibility vanishes on the whole grid")
    u = z.real / z_scale
    w = z.imag / z_scale

    omega_scale = float(grid[-1]) if grid[-1] > 0 else 1.0
    x = (grid / omega_scale) ** 2
    powers = np.column_stack([x * x, x, np.ones_like(x)])
    zeros = np.zeros_like(powers)

    rows_a = np.hstack([powers, zeros, -u[:, None] * powers])
    rows_b = np.hstack([zeros, powers, w[:, None] * powers])
    system = np.vstack([rows_a, rows_b])

    _, s, vh = scipy.linalg.svd(system)
    p = vh[-1]
    logger.debug(f"Rational fit singular values: {s[-2]:.3e} (next) / {s[-1]:.3e} (null)")

    unscale = np.array([omega_scale ** -4, omega_scale ** -2, 1.0])
    a = p[0:3] * unscale * z_scale
    b = p[3:6] * unscale * z_scale
    c = p[6:9] * unscale
    norm = c[2] if c[2] != 0 else c[np.argmax(np.abs(c))]

    return RationalCoefficients(
        a=tuple(float(v) for v in a / norm),
        b=tuple(float(v) for v in b / norm),
        c=tuple(float(v) for v in c / norm),
        varsigma=varsigma,
    )


def probe_output(sys: AtomicSystem, cfg: OpticalRfConfig, chi: complex) -> ProbeOutput:
    """
    Lambert-Beer transformation of the probe.

    Returns:
        ProbeOutput(amp, phase, power) with power in watts
    """
    factor = math.pi * sys.cell_length / cfg.lambda_p
    amp = cfg.probe_amp_in * math.exp(-factor * chi.imag)
    phase = cfg.probe_phase_in + factor * chi.real
    power = (math.pi * const.c * const.epsilon_0 / (8 * math.log(2))) * cfg.fwhm_p ** 2 * amp ** 2
    return ProbeOutput(amp, phase, power)


def alpha2(sys: AtomicSystem, cfg: OpticalRfConfig) -> float:
    """alpha_2 = pi l mu34 / (hbar lambda_p)."""
    return math.pi * sys.cell_length * sys.mu34 / (const.hbar * cfg.lambda_p)


def responsivity(sys: AtomicSystem, cfg: OpticalRfConfig, chi_deriv: complex) -> float:
    """Atomic responsivity kappa = alpha_2 |chi'|."""
    return alpha2(sys, cfg) * math.hypot(chi_deriv.real, chi_deriv.imag)


def detection_phase(
    local_phase: float, chi_deriv: complex, probe_phase_out: float
) -> Tuple[float, float]:
    """
    Superimposed BCOD phase.

    Returns:
        (varphi, psi) with psi = arccos(Im chi' / |chi'|) and
        varphi = local_phase - probe_phase_out + psi wrapped to (-pi, pi]

    Raises:
        UndefinedPhaseError: If chi' is zero
    """
    modulus = math.hypot(chi_deriv.real, chi_deriv.imag)
    if modulus == 0.0:
        raise UndefinedPhaseError("psi is undefined for chi' = 0")
    psi = math.acos(max(-1.0, min(1.0, chi_deriv.imag / modulus)))
    return wrap_angle(local_phase - probe_phase_out + psi), psi


def psl_optimal_local_phase(probe_phase_out: float, psi: float) -> float:
    """Local-beam phase giving varphi = 0."""
    return wrap_angle(probe_phase_out - psi)
