"""
Transducer Module
==================
Balanced coherent optical detection front end of a RAQ-ULA sensor: gain,
per-sensor phase factor, and the PSL/SQL noise coefficient and power.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Optional

import scipy.constants as const

from ..models.models import (
    ArrayGeometry,
    AtomicSystem,
    LoConfig,
    OpticalRfConfig,
    PhotodetectorConfig,
    RationalCoefficients,
    Regime,
    SensorResponse,
)
from . import atomphys
from .exceptions import InvalidInputError, UnboundedNoiseError

logger = logging.getLogger(__name__)

# Impedance of free space (ohm)
Z0 = const.physical_constants["characteristic impedance of vacuum"][0]

# |cos(varphi)| below this is treated as zero in the PSL coefficient
COS_ZERO_TOL = 1e-12

UNBOUNDED_POLICIES = ("error", "inf")


@dataclass(frozen=True)
class FrontEndState:
    """Everything the array model needs from one sensor's physics."""
    chi: complex
    chi_deriv: complex
    probe_amp: float
    probe_phase: float
    probe_power: float
    kappa: float
    psi: float
    local_phase: float
    varphi: float
    rho: float
    phi_ref: complex

    @property
    def response(self) -> SensorResponse:
        return SensorResponse(rho=self.rho, phi_ref=self.phi_ref, kappa=self.kappa, varphi=self.varphi)


def sensor_gain(pd: PhotodetectorConfig, probe_power_out: float, kappa: float) -> float:
    """rho = 4 alpha_1^2 Z0 G P_l P kappa^2."""
    if probe_power_out < 0 or kappa < 0:
        raise InvalidInputError("probe power and kappa must be nonnegative")
    return 4 * pd.alpha1 ** 2 * Z0 * pd.lna_gain * pd.local_beam_power * probe_power_out * kappa ** 2


def lo_phase_at_sensor(m: int, lo: LoConfig, geom: ArrayGeometry) -> float:
    """theta_{l,m} = theta_{l,1} + (2 pi / lambda) d (m - 1) sin(vartheta)."""
    return lo.theta_l1 + geom.wavenumber_spacing * (m - 1) * math.sin(lo.vartheta)


def reference_phase_factor(theta_l1: float, varphi: float) -> complex:
    """Phi = (e^{-j(theta - varphi)} + e^{-j(theta + varphi)}) / 2 = cos(varphi) e^{-j theta}."""
    return 0.5 * cmath.exp(-1j * (theta_l1 - varphi)) + 0.5 * cmath.exp(-1j * (theta_l1 + varphi))


def sensor_phase(m: int, lo: LoConfig, varphi: float, geom: ArrayGeometry) -> complex:
    """
    Phase factor Phi_m of sensor m (1-based).

    Raises:
        InvalidInputError: If m is outside 1..M
    """
    if not 1 <= m <= geom.m_sensors:
        raise InvalidInputError(f"Sensor index {m} outside 1..{geom.m_sensors}")
    phi = reference_phase_factor(lo.theta_l1, varphi)
    return phi * cmath.exp(-1j * geom.wavenumber_spacing * (m - 1) * math.sin(lo.vartheta))


def sensor_volume(beam_radius: float, cell_length: float) -> float:
    """Beam-cylinder volume pi r^2 l."""
    return math.pi * beam_radius ** 2 * cell_length


def psl_photon_scale(pd: PhotodetectorConfig) -> float:
    """Factor converting watts into the power reading used by the PSL coefficient."""
    if pd.psl_power_unit == "watts":
        return 1.0
    return pd.eta / (const.hbar * pd.omega_p_angular)


def noise_coefficient(
    regime: Regime,
    n_samples: int,
    bandwidth: float,
    probe_power_out: float,
    kappa: float,
    varphi: float,
    sys: AtomicSystem,
    sensor_volume: float,
    gamma2_total: Optional[float] = None,
    on_unbounded: str = "error",
) -> float:
    """
    Noise coefficient varpi in the PSL or SQL regime.

    Args:
        regime: Regime.PSL or Regime.SQL
        n_samples: Snapshot count N
        bandwidth: Signal bandwidth B (Hz)
        probe_power_out: Output probe power reading for PSL
        kappa: Responsivity at the LO point
        varphi: Superimposed phase at the LO point
        sys: Atomic constants (mu34, N0, upsilon for SQL)
        sensor_volume: Beam cylinder volume V (m^3)
        gamma2_total: Total dephasing Gamma_2 (defaults to sys.total_dephasing)
        on_unbounded: "error" raises, "inf" returns math.inf when cos(varphi) = 0

    Raises:
        InvalidInputError: On invalid counts, bandwidth or regime
        UnboundedNoiseError: PSL with cos(varphi) = 0 and on_unbounded="error"
    """
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be >= 1, got {n_samples}")
    if bandwidth <= 0:
        raise InvalidInputError(f"bandwidth must be > 0, got {bandwidth}")
    if on_unbounded not in UNBOUNDED_POLICIES:
        raise InvalidInputError(f"on_unbounded must be one of {UNBOUNDED_POLICIES}")

    if regime == Regime.PSL:
        cos2 = math.cos(varphi) ** 2
        denominator = 2 * n_samples * probe_power_out * kappa ** 2 * cos2
        if abs(math.cos(varphi)) < COS_ZERO_TOL or denominator == 0.0:
            if on_unbounded == "inf":
                return math.inf
            raise UnboundedNoiseError(f"PSL noise coefficient diverges at varphi={varphi:.6f} rad")
        return bandwidth / denominator

    if regime == Regime.SQL:
        gamma_total = sys.total_dephasing if gamma2_total is None else gamma2_total
        return (
            (1.0 / (4 * Z0 * n_samples))
            * (const.hbar / sys.mu34) ** 2
            * (gamma_total / (sys.effective_density * sensor_volume))
            * bandwidth
        )

    raise InvalidInputError(f"noise_coefficient has no formula for regime {regime}")


def noise_power(varpi: float, n_samples: int, rho: float, phi_ref: complex) -> float:
    """sigma^2 = 2 N rho |Phi|^2 varpi."""
    if varpi < 0 or n_samples < 0 or rho < 0:
        raise InvalidInputError("noise_power inputs must be nonnegative")
    return 2 * n_samples * rho * abs(phi_ref) ** 2 * varpi


def evaluate_front_end(
    sys: AtomicSystem,
    optics: OpticalRfConfig,
    pd: PhotodetectorConfig,
    lo: LoConfig,
    rational: Optional[RationalCoefficients] = None,
    varphi: Optional[float] = None,
) -> FrontEndState:
    """
    Compose the sensor physics at the LO operating point.

    With pd.local_beam_phase unset the local beam takes the PSL-optimal phase
    (varphi = 0). A given varphi overrides the superimposed phase directly.
    """
    chi = atomphys.susceptibility(sys, optics, lo.omega_l, rational)
    chi_deriv = atomphys.susceptibility_derivative(sys, optics, lo.omega_l, rational)
    probe = atomphys.probe_output(sys, optics, chi)
    kappa = atomphys.responsivity(sys, optics, chi_deriv)

    _, psi = atomphys.detection_phase(0.0, chi_deriv, probe.phase)
    if varphi is not None:
        local_phase = atomphys.wrap_angle(varphi + probe.phase - psi)
        phase = atomphys.wrap_angle(varphi)
    else:
        if pd.local_beam_phase is None:
            local_phase = atomphys.psl_optimal_local_phase(probe.phase, psi)
        else:
            local_phase = pd.local_beam_phase
        phase, _ = atomphys.detection_phase(local_phase, chi_deriv, probe.phase)

    rho = sensor_gain(pd, probe.power, kappa)
    phi_ref = reference_phase_factor(lo.theta_l1, phase)
    logger.debug(
        f"Front end: chi={chi:.4e}, chi'={chi_deriv:.4e}, kappa={kappa:.4e}, "
        f"varphi={phase:.4f}, rho={rho:.4e}"
    )
    return FrontEndState(
        chi=chi,
        chi_deriv=chi_deriv,
        probe_amp=probe.amp,
        probe_phase=probe.phase,
        probe_power=probe.power,
        kappa=kappa,
        psi=psi,
        local_phase=local_phase,
        varphi=phase,
        rho=rho,
        phi_ref=phi_ref,
    )
