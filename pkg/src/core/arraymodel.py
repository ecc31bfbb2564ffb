"""
Array Model Module
===================
RAQ-ULA geometry and snapshot synthesis: steering and LO-mismatch matrices,
path loss, random target scenes, and noisy baseband snapshots for the RAQ
array and for a classical antenna array.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.constants as const

from ..models.models import (
    ArrayGeometry,
    ClassicalReceiverConfig,
    LoConfig,
    PathLoss,
    Regime,
    SceneTemplate,
    SensorResponse,
    SnapshotMatrix,
    TargetScene,
)
from ..utils.rng import trial_generator
from .exceptions import InvalidInputError, InvalidSceneError
from .transducer import Z0

logger = logging.getLogger(__name__)

WAVEFORMS = ("gaussian", "constant")

# Rejection-sampling budget for scenes with a DOA separation guard
MAX_SCENE_DRAWS = 10000


def steering_vector(theta: float, geom: ArrayGeometry) -> np.ndarray:
    """a(theta)_m = exp(j (2 pi / lambda) (m - 1) d sin(theta)), length M."""
    m = np.arange(geom.m_sensors)
    return np.exp(1j * geom.wavenumber_spacing * m * math.sin(theta))


def steering_matrix(doas: Sequence[float], geom: ArrayGeometry) -> np.ndarray:
    """M x K matrix A(theta) with steering vectors in the columns."""
    m = np.arange(geom.m_sensors)[:, np.newaxis]
    return np.exp(1j * geom.wavenumber_spacing * m * np.sin(np.asarray(doas, dtype=float))[np.newaxis, :])


def steering_derivative(doas: Sequence[float], geom: ArrayGeometry) -> np.ndarray:
    """Columns d a(theta_k) / d theta_k."""
    theta = np.asarray(doas, dtype=float)
    m = np.arange(geom.m_sensors)[:, np.newaxis]
    return 1j * geom.wavenumber_spacing * m * np.cos(theta)[np.newaxis, :] * steering_matrix(theta, geom)


def lo_mismatch_matrix(vartheta: float, geom: ArrayGeometry) -> np.ndarray:
    """D = diag(conj(a(vartheta))), the LO plane-wave phase gradient."""
    return np.diag(steering_vector(vartheta, geom).conj())


def path_loss_db(u: float, pl: PathLoss) -> float:
    """
    Echo power change over distance u in dB, K0 at u0 falling 10 v dB per decade.

    K0 is the (negative) gain at the reference distance, so 1500 m with
    K0 = -30 and v = 2 gives about -93.52 dB.

    Raises:
        InvalidInputError: If u < u0 or u0 <= 0
    """
    if pl.u0 <= 0 or u < pl.u0:
        raise InvalidInputError(f"Distance {u} m below reference distance {pl.u0} m")
    return pl.k0_db - 10 * pl.exponent * math.log10(u / pl.u0)


def received_power_w(reflected_power_dbm: float, path_loss: float) -> float:
    """Received power in watts for a reflected power (dBm) and a path_loss_db value."""
    return 10 ** ((reflected_power_dbm + path_loss - 30) / 10)


def effective_aperture(geom: ArrayGeometry, override: Optional[float] = None) -> float:
    """Isotropic aperture lambda^2 / (4 pi) unless overridden (m^2)."""
    if override is not None:
        return override
    return geom.carrier_wavelength ** 2 / (4 * math.pi)


def echo_field_amplitude(p_rx: float, geom: ArrayGeometry, aperture: Optional[float] = None) -> float:
    """RF field amplitude E = sqrt(2 Z0 P / A_eff) in V/m."""
    return math.sqrt(2 * Z0 * p_rx / effective_aperture(geom, aperture))


def echo_amplitudes(scene: TargetScene, geom: ArrayGeometry, field_units: bool = True) -> np.ndarray:
    """
    Per-target RMS echo amplitude.

    Args:
        scene: Target scene
        geom: Array geometry
        field_units: True gives V/m (RAQ array), False gives sqrt(W) (antenna array)
    """
    amps = []
    for power_dbm, distance in zip(scene.reflected_power_dbm, scene.distances):
        p_rx = received_power_w(power_dbm, path_loss_db(distance, scene.pathloss))
        amps.append(echo_field_amplitude(p_rx, geom, scene.effective_aperture) if field_units else math.sqrt(p_rx))
    return np.array(amps)


def draw_echoes(
    amplitudes: Sequence[float], n_samples: int, rng: np.random.Generator, waveform: str = "gaussian"
) -> np.ndarray:
    """
    K x N echo matrix with E|s_kt|^2 = amplitude_k^2.

    "gaussian" draws circular complex Gaussian samples; "constant" draws
    unit-modulus samples with uniform random phase.
    """
    amps = np.asarray(amplitudes, dtype=float)[:, np.newaxis]
    shape = (amps.shape[0], n_samples)
    if waveform == "gaussian":
        unit = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    elif waveform == "constant":
        unit = np.exp(2j * math.pi * rng.random(shape))
    else:
        raise InvalidInputError(f"Unknown echo waveform '{waveform}', expected one of {WAVEFORMS}")
    return amps * unit


def draw_noise(m_sensors: int, n_samples: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise with per-entry variance sigma2."""
    shape = (m_sensors, n_samples)
    return math.sqrt(sigma2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sine_separation(doas: Sequence[float]) -> float:
    """Smallest pairwise gap of sin(theta), the spacing the array resolves (inf for K = 1)."""
    sines = np.sort(np.sin(np.asarray(doas, dtype=float)))
    return float(np.min(np.diff(sines))) if sines.size > 1 else math.inf


def _draw_doas(template: SceneTemplate, rng: np.random.Generator) -> Tuple[float, ...]:
    low, high = template.doa_range
    # broadside-equivalent guard: sin(theta) gaps of at least sin(min_separation)
    min_gap = math.sin(template.min_separation)
    for _ in range(MAX_SCENE_DRAWS):
        doas = np.sort(rng.uniform(low, high, template.k_targets))
        if np.any(np.abs(doas) >= math.pi / 2):
            continue
        if sine_separation(doas) >= min_gap:
            return tuple(float(d) for d in doas)
    raise InvalidSceneError(
        f"Could not place {template.k_targets} DOAs in {template.doa_range} "
        f"with {math.degrees(template.min_separation):.2f} deg separation"
    )


def _draw_distances(template: SceneTemplate, rng: np.random.Generator) -> Tuple[float, ...]:
    radius = template.disk_radius * np.sqrt(rng.random(template.k_targets))
    angle = 2 * math.pi * rng.random(template.k_targets)
    x = template.disk_center + radius * np.cos(angle)
    y = radius * np.sin(angle)
    return tuple(float(u) for u in np.hypot(x, y))


def draw_scene(template: SceneTemplate, rng: np.random.Generator) -> TargetScene:
    """
    Draw a random target scene.

    Pinned DOAs/distances in the template are used as given; otherwise DOAs
    are uniform in the template range with neighbouring sin(theta) values at
    least sin(min_separation) apart, and distances follow a uniform point in
    the target disk.
    """
    doas = template.doas if template.doas is not None else _draw_doas(template, rng)
    distances = template.distances if template.distances is not None else _draw_distances(template, rng)
    if len(doas) != template.k_targets or len(distances) != template.k_targets:
        raise InvalidSceneError("Pinned DOAs/distances do not match k_targets")
    return TargetScene(
        doas=tuple(doas),
        reflected_power_dbm=(template.reflected_power_dbm,) * template.k_targets,
        distances=tuple(distances),
        pathloss=template.pathloss,
        bandwidth=template.bandwidth,
        waveform=template.waveform,
        effective_aperture=template.effective_aperture,
    )


def validate_scene(scene: TargetScene, geom: ArrayGeometry) -> None:
    """
    Raises:
        InvalidSceneError: If K is out of range or DOAs are invalid
    """
    k = scene.k_targets
    if k < 1 or k >= geom.m_sensors:
        raise InvalidSceneError(f"Need 1 <= K < M, got K={k}, M={geom.m_sensors}")
    doas = np.asarray(scene.doas, dtype=float)
    if np.any(np.abs(doas) >= math.pi / 2):
        raise InvalidSceneError("DOAs must lie strictly inside (-pi/2, pi/2)")
    if len(np.unique(doas)) != k:
        raise InvalidSceneError("DOAs must be pairwise distinct")
    if not (len(scene.reflected_power_dbm) == len(scene.distances) == k):
        raise InvalidSceneError("Per-target sequences must have length K")


def split_groups(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Overlapping subarrays: rows 1..M-1 and rows 2..M."""
    return y[:-1, :], y[1:, :]


def stack_groups(y: np.ndarray) -> np.ndarray:
    """2(M-1) x N stacked matrix [Y1; Y2]."""
    y1, y2 = split_groups(y)
    return np.vstack([y1, y2])


def synthesize_snapshots(
    scene: TargetScene,
    geom: ArrayGeometry,
    resp: SensorResponse,
    lo: LoConfig,
    n_samples: int,
    sigma2: float,
    seed: Sequence[int],
    regime: Regime = Regime.PSL,
    echoes: Optional[np.ndarray] = None,
) -> SnapshotMatrix:
    """
    RAQ-ULA snapshots Y = sqrt(rho) Phi D A(theta) S + W.

    Args:
        scene: Target scene
        geom: Array geometry
        resp: Sensor gain and reference phase factor
        lo: LO configuration (vartheta sets D)
        n_samples: Snapshot count N
        sigma2: Per-entry noise variance
        seed: Seed tuple; echoes use stream (*seed, 0), noise (*seed, 1)
        regime: Regime tag stored with the result
        echoes: Optional K x N echo matrix replacing the drawn one

    Raises:
        InvalidSceneError: If K >= M or DOAs are invalid
    """
    validate_scene(scene, geom)
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be >= 1, got {n_samples}")
    if not math.isfinite(sigma2) or sigma2 < 0:
        raise InvalidInputError(f"sigma2 must be finite and >= 0, got {sigma2}")

    seed = tuple(int(s) for s in seed)
    if echoes is None:
        echoes = draw_echoes(
            echo_amplitudes(scene, geom, field_units=True), n_samples, trial_generator(*seed, 0), scene.waveform
        )
    d = lo_mismatch_matrix(lo.vartheta, geom)
    a = steering_matrix(scene.doas, geom)
    clean = math.sqrt(resp.rho) * resp.phi_ref * (d @ a @ echoes)
    noise = draw_noise(geom.m_sensors, n_samples, sigma2, trial_generator(*seed, 1))
    return SnapshotMatrix(y=clean + noise, regime=regime, sigma2=sigma2, seed=seed, echoes=echoes)


def classical_noise_power(rx: ClassicalReceiverConfig, bandwidth: float) -> float:
    """k_B T B F scaled by the receiver gain (watts)."""
    return (
        const.k * rx.temperature_k * bandwidth
        * 10 ** (rx.noise_figure_db / 10) * 10 ** (rx.rx_gain_db / 10)
    )


def synthesize_classical_snapshots(
    scene: TargetScene,
    geom: ArrayGeometry,
    rx: ClassicalReceiverConfig,
    n_samples: int,
    seed: Sequence[int],
    echoes: Optional[np.ndarray] = None,
    sigma2: Optional[float] = None,
) -> SnapshotMatrix:
    """
    Antenna-ULA snapshots Y = A(theta) S + W on a sqrt(W) scale.

    Signal power is received power times antenna and receiver gain; noise
    power is thermal noise with the receiver noise figure and gain. No LO
    mismatch applies.
    """
    validate_scene(scene, geom)
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be >= 1, got {n_samples}")

    seed = tuple(int(s) for s in seed)
    if echoes is None:
        gain = math.sqrt(10 ** ((rx.antenna_gain_db + rx.rx_gain_db) / 10))
        echoes = gain * draw_echoes(
            echo_amplitudes(scene, geom, field_units=False), n_samples, trial_generator(*seed, 0), scene.waveform
        )
    noise_var = classical_noise_power(rx, scene.bandwidth) if sigma2 is None else sigma2
    clean = steering_matrix(scene.doas, geom) @ echoes
    noise = draw_noise(geom.m_sensors, n_samples, noise_var, trial_generator(*seed, 1))
    return SnapshotMatrix(y=clean + noise, regime=Regime.CLASSICAL, sigma2=noise_var, seed=seed, echoes=echoes)
