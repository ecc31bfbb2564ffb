"""
Data Models for the RAQ-ULA Toolkit
====================================
Dataclasses for the atomic system, optical/RF drive, photodetection, array
geometry, target scenes and experiment configuration. All quantities are SI
(angular rates in rad/s, angles in radians) once loaded.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.constants as const


class Regime(str, Enum):
    """Noise regime of a snapshot set."""
    PSL = "PSL"
    SQL = "SQL"
    CLASSICAL = "CLASSICAL"


@dataclass(frozen=True)
class AtomicSystem:
    """Atom and vapour-cell constants."""
    gamma2: float
    mu12: float
    mu34: float
    n0: float
    upsilon: float
    cell_length: float
    gamma3: float = 0.0
    gamma4: float = 0.0
    gamma: float = 0.0
    gamma_c: float = 0.0
    gamma2_total: Optional[float] = None

    @property
    def effective_density(self) -> float:
        """Excited-fraction density N0_bar = upsilon * N0."""
        return self.upsilon * self.n0

    @property
    def total_dephasing(self) -> float:
        """Gamma_2 for the SQL formula (defaults to the Lindblad gamma2)."""
        return self.gamma2 if self.gamma2_total is None else self.gamma2_total

    def validate(self) -> List[str]:
        errors = []
        if self.gamma2 <= 0:
            errors.append(f"gamma2 must be > 0, got {self.gamma2}")
        if self.mu12 <= 0 or self.mu34 <= 0:
            errors.append("dipole moments mu12 and mu34 must be > 0")
        if self.n0 <= 0:
            errors.append(f"n0 must be > 0, got {self.n0}")
        if not 0 < self.upsilon <= 1:
            errors.append(f"upsilon must lie in (0, 1], got {self.upsilon}")
        if self.cell_length <= 0:
            errors.append(f"cell_length must be > 0, got {self.cell_length}")
        for name in ("gamma3", "gamma4", "gamma", "gamma_c"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be >= 0")
        return errors


@dataclass(frozen=True)
class OpticalRfConfig:
    """Probe, coupling and LO drive parameters of the four-level ladder."""
    omega_p: float
    omega_c: float
    omega_l: float
    delta_p: float
    delta_c: float
    delta_l: float
    lambda_p: float
    probe_amp_in: float
    fwhm_p: float
    beam_radius: float
    probe_phase_in: float = 0.0

    @property
    def f_p(self) -> float:
        """Probe optical frequency (Hz)."""
        return const.c / self.lambda_p

    def validate(self) -> List[str]:
        errors = []
        for name in ("omega_p", "omega_c", "omega_l"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be >= 0")
        if self.lambda_p <= 0:
            errors.append(f"lambda_p must be > 0, got {self.lambda_p}")
        if self.fwhm_p <= 0:
            errors.append(f"fwhm_p must be > 0, got {self.fwhm_p}")
        if self.beam_radius <= 0:
            errors.append(f"beam_radius must be > 0, got {self.beam_radius}")
        return errors


@dataclass(frozen=True)
class RationalCoefficients:
    """Coefficients of the rational susceptibility form chi(Omega_RF)."""
    a: Tuple[float, float, float]
    b: Tuple[float, float, float]
    c: Tuple[float, float, float]
    varsigma: float


@dataclass(frozen=True)
class PhotodetectorConfig:
    """Balanced coherent optical detection parameters."""
    eta: float
    lna_gain: float
    local_beam_power: float
    omega_p_angular: float
    local_beam_phase: Optional[float] = None
    q_charge: float = const.e
    psl_power_unit: str = "photon_flux"

    @property
    def alpha1(self) -> float:
        """alpha_1 = eta q / (hbar omega_p)."""
        return self.eta * self.q_charge / (const.hbar * self.omega_p_angular)

    def validate(self) -> List[str]:
        errors = []
        if not 0 < self.eta <= 1:
            errors.append(f"eta must lie in (0, 1], got {self.eta}")
        if self.lna_gain <= 0:
            errors.append(f"lna_gain must be > 0, got {self.lna_gain}")
        if self.local_beam_power <= 0:
            errors.append(f"local_beam_power must be > 0, got {self.local_beam_power}")
        if self.psl_power_unit not in ("photon_flux", "watts"):
            errors.append("psl_power_unit must be 'photon_flux' or 'watts'")
        return errors


@dataclass(frozen=True)
class LoConfig:
    """RF local oscillator (plane wave) configuration."""
    omega_l: float
    f_l: float
    theta_l1: float
    vartheta: float
    delta_l: float = 0.0

    def validate(self) -> List[str]:
        errors = []
        if self.omega_l <= 0:
            errors.append(f"omega_l must be > 0, got {self.omega_l}")
        if not -math.pi / 2 < self.vartheta < math.pi / 2:
            errors.append(f"vartheta must lie in (-pi/2, pi/2), got {self.vartheta}")
        return errors


@dataclass(frozen=True)
class SensorResponse:
    """Per-sensor gain and reference phase factor of the RAQ front end."""
    rho: float
    phi_ref: complex
    kappa: float
    varphi: float


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array geometry."""
    m_sensors: int
    spacing: float
    carrier_wavelength: float
    carrier_freq: float

    @classmethod
    def from_carrier(
        cls, m_sensors: int, carrier_freq: float, spacing: Optional[float] = None
    ) -> 'ArrayGeometry':
        """Build a geometry from the carrier frequency (half-wavelength spacing by default)."""
        wavelength = const.c / carrier_freq
        return cls(
            m_sensors=m_sensors,
            spacing=wavelength / 2 if spacing is None else spacing,
            carrier_wavelength=wavelength,
            carrier_freq=carrier_freq,
        )

    @property
    def wavenumber_spacing(self) -> float:
        """(2 pi / lambda) * d."""
        return 2 * math.pi * self.spacing / self.carrier_wavelength

    def validate(self) -> List[str]:
        errors = []
        if self.m_sensors < 2:
            errors.append(f"m_sensors must be >= 2, got {self.m_sensors}")
        if self.spacing <= 0:
            errors.append(f"spacing must be > 0, got {self.spacing}")
        if self.carrier_wavelength <= 0:
            errors.append("carrier_wavelength must be > 0")
        return errors


@dataclass(frozen=True)
class PathLoss:
    """Log-distance path loss K0 + 10 v log10(u / u0)."""
    k0_db: float = -30.0
    exponent: float = 2.0
    u0: float = 1.0


@dataclass(frozen=True)
class TargetScene:
    """A concrete set of K targets."""
    doas: Tuple[float, ...]
    reflected_power_dbm: Tuple[float, ...]
    distances: Tuple[float, ...]
    pathloss: PathLoss = field(default_factory=PathLoss)
    bandwidth: float = 100e3
    waveform: str = "gaussian"
    effective_aperture: Optional[float] = None

    @property
    def k_targets(self) -> int:
        return len(self.doas)


@dataclass(frozen=True)
class SceneTemplate:
    """Recipe for drawing random scenes in Monte Carlo trials."""
    k_targets: int = 5
    reflected_power_dbm: float = 23.0
    doa_range: Tuple[float, float] = (-math.radians(80.0), math.radians(80.0))
    min_separation: float = math.radians(1.0)  # broadside-equivalent, applied to sin(theta)
    disk_radius: float = 500.0
    disk_center: float = 1500.0
    pathloss: PathLoss = field(default_factory=PathLoss)
    bandwidth: float = 100e3
    waveform: str = "gaussian"
    effective_aperture: Optional[float] = None
    doas: Optional[Tuple[float, ...]] = None
    distances: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class ClassicalReceiverConfig:
    """Antenna-based baseline receiver."""
    noise_figure_db: float = 7.0
    antenna_gain_db: float = 0.0
    rx_gain_db: float = 0.0
    temperature_k: float = 290.0


@dataclass
class SnapshotMatrix:
    """M x N baseband measurements with the echo matrix that produced them."""
    y: np.ndarray
    regime: Regime
    sigma2: float
    seed: Tuple[int, ...]
    echoes: Optional[np.ndarray] = None

    @property
    def n_samples(self) -> int:
        return self.y.shape[1]

    def sample_covariance(self) -> np.ndarray:
        """R_y = Y Y^H / N."""
        return self.y @ self.y.conj().T / self.n_samples


@dataclass(frozen=True)
class SweepSpec:
    """Swept variable and grid (grid in display units: dBm, counts, degrees)."""
    variable: str
    grid: Tuple[float, ...]

    VARIABLES = ("reflected_power", "m_sensors", "k_targets", "n_samples", "doa_range", "varphi")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete, validated description of a Monte Carlo experiment."""
    geometry: ArrayGeometry
    scene: SceneTemplate
    atomic: AtomicSystem
    optics: OpticalRfConfig
    photodetector: PhotodetectorConfig
    lo: LoConfig
    classical: ClassicalReceiverConfig = field(default_factory=ClassicalReceiverConfig)
    rational: Optional[RationalCoefficients] = None
    regimes: Tuple[Regime, ...] = (Regime.PSL, Regime.SQL, Regime.CLASSICAL)
    estimators: Tuple[str, ...] = ("raq_esprit", "classical_esprit", "ml_bound", "crlb")
    trials: int = 500
    master_seed: int = 0
    n_samples: int = 50
    sweep: Optional[SweepSpec] = None
    workers: int = 1
    unbounded_policy: str = "inf"
    varphi: Optional[float] = None
    noise_variance_override: Dict[str, float] = field(default_factory=dict)
    ml_grid_step: float = math.radians(0.5)
