"""
Shared fixtures: pinned physical values, small geometries and fast
experiment configurations.
"""
import math

import pytest
import scipy.constants as const

from src.core.cache_manager import get_susceptibility_cache
from src.models.models import (
    ArrayGeometry,
    AtomicSystem,
    ClassicalReceiverConfig,
    ExperimentConfig,
    LoConfig,
    OpticalRfConfig,
    PhotodetectorConfig,
    Regime,
    SceneTemplate,
    SweepSpec,
)

MHZ = 2 * math.pi * 1e6
EA0 = const.e * const.physical_constants["Bohr radius"][0]
CARRIER = 6.9458e9
# LO Rabi frequency on the transparency point of the optics detunings
OMEGA_L = 1.784 * MHZ


@pytest.fixture(autouse=True)
def fresh_cache():
    cache = get_susceptibility_cache()
    cache.clear()
    cache.enabled = True
    yield cache
    cache.clear()


@pytest.fixture
def atomic():
    return AtomicSystem(
        gamma2=5.2 * MHZ,
        mu12=2.59 * EA0,
        mu34=1443.0 * EA0,
        n0=4.89e16,
        upsilon=0.01,
        cell_length=0.1,
    )


@pytest.fixture
def decaying_atomic(atomic):
    """Rydberg levels with their own decay, so every truncation is well posed."""
    return AtomicSystem(
        gamma2=atomic.gamma2, mu12=atomic.mu12, mu34=atomic.mu34, n0=atomic.n0,
        upsilon=atomic.upsilon, cell_length=atomic.cell_length,
        gamma3=0.2 * MHZ, gamma4=0.1 * MHZ,
    )


@pytest.fixture
def optics():
    return OpticalRfConfig(
        omega_p=1.0 * MHZ,
        omega_c=10.0 * MHZ,
        omega_l=OMEGA_L,
        delta_p=-0.9133 * MHZ,
        delta_c=1.8090 * MHZ,
        delta_l=-0.0075 * MHZ,
        lambda_p=852.35e-9,
        probe_amp_in=141.0,
        fwhm_p=1e-3,
        beam_radius=0.5e-3,
    )


@pytest.fixture
def photodetector(optics):
    return PhotodetectorConfig(
        eta=0.8,
        lna_gain=100.0,
        local_beam_power=1e-3,
        omega_p_angular=2 * math.pi * const.c / optics.lambda_p,
    )


@pytest.fixture
def lo():
    return LoConfig(
        omega_l=OMEGA_L, f_l=6.94575e9, theta_l1=math.pi / 3, vartheta=math.radians(20.0), delta_l=-0.0075 * MHZ
    )


@pytest.fixture
def geometry():
    return ArrayGeometry.from_carrier(10, CARRIER)


@pytest.fixture
def small_geometry():
    return ArrayGeometry.from_carrier(6, CARRIER)


@pytest.fixture
def experiment(atomic, optics, photodetector, lo):
    """Fast experiment: 8 sensors, 2 targets in +-60 deg, 8 trials."""
    return ExperimentConfig(
        geometry=ArrayGeometry.from_carrier(8, CARRIER),
        scene=SceneTemplate(
            k_targets=2,
            reflected_power_dbm=23.0,
            doa_range=(-math.radians(60), math.radians(60)),
            min_separation=math.radians(5.0),
        ),
        atomic=atomic,
        optics=optics,
        photodetector=photodetector,
        lo=lo,
        classical=ClassicalReceiverConfig(),
        regimes=(Regime.PSL, Regime.SQL, Regime.CLASSICAL),
        estimators=("raq_esprit", "classical_esprit", "ml_bound", "crlb"),
        trials=8,
        master_seed=7,
        n_samples=20,
        sweep=SweepSpec(variable="reflected_power", grid=(0.0, 23.0)),
    )
