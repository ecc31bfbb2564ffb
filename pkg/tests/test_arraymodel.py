"""Tests for array geometry, path loss and snapshot synthesis."""
import math

import numpy as np
import pytest
import scipy.constants as const
from numpy.testing import assert_allclose

from src.core import arraymodel
from src.core.exceptions import InvalidInputError, InvalidSceneError
from src.models.models import (
    ArrayGeometry,
    ClassicalReceiverConfig,
    LoConfig,
    PathLoss,
    Regime,
    SceneTemplate,
    SensorResponse,
    TargetScene,
)
from src.utils.rng import trial_generator

from .conftest import CARRIER


def make_scene(doas, distances=None, power=23.0):
    distances = distances or (1500.0,) * len(doas)
    return TargetScene(
        doas=tuple(doas),
        reflected_power_dbm=(power,) * len(doas),
        distances=tuple(distances),
    )


UNIT_RESPONSE = SensorResponse(rho=1.0, phi_ref=1.0 + 0j, kappa=1.0, varphi=0.0)


def test_broadside_steering_is_all_ones(geometry):
    assert_allclose(arraymodel.steering_vector(0.0, geometry), np.ones(geometry.m_sensors))


def test_half_wavelength_steering_at_thirty_degrees():
    geom = ArrayGeometry.from_carrier(2, CARRIER)
    assert_allclose(arraymodel.steering_vector(math.radians(30), geom), [1.0, 1j], atol=1e-12)


def test_steering_matrix_columns(geometry):
    doas = [-0.4, 0.1, 0.9]
    a = arraymodel.steering_matrix(doas, geometry)
    assert a.shape == (geometry.m_sensors, 3)
    for k, theta in enumerate(doas):
        assert_allclose(a[:, k], arraymodel.steering_vector(theta, geometry))


def test_steering_shift_invariance(geometry):
    theta = 0.37
    a = arraymodel.steering_vector(theta, geometry)
    step = np.exp(1j * geometry.wavenumber_spacing * math.sin(theta))
    assert_allclose(a[1:], a[:-1] * step, atol=1e-12)


def test_subarray_shift_invariance_on_random_angles(geometry):
    rng = np.random.default_rng(17)
    kd = geometry.wavenumber_spacing
    for _ in range(100):
        doas = rng.uniform(-math.pi / 2, math.pi / 2, int(rng.integers(1, 5)))
        vartheta = float(rng.uniform(-math.pi / 2, math.pi / 2))
        a = arraymodel.steering_matrix(doas, geometry)
        rotation = np.diag(np.exp(1j * kd * np.sin(doas)))
        assert_allclose(a[1:], a[:-1] @ rotation, atol=1e-12)
        d = np.diag(arraymodel.lo_mismatch_matrix(vartheta, geometry))
        assert_allclose(d[1:], np.exp(-1j * kd * math.sin(vartheta)) * d[:-1], atol=1e-12)


def test_steering_derivative_matches_finite_difference(geometry):
    doas, h = [-0.3, 0.6], 1e-6
    numeric = (
        arraymodel.steering_matrix([d + h for d in doas], geometry)
        - arraymodel.steering_matrix([d - h for d in doas], geometry)
    ) / (2 * h)
    assert_allclose(arraymodel.steering_derivative(doas, geometry), numeric, atol=1e-6)


def test_lo_mismatch_matrix(geometry):
    assert_allclose(arraymodel.lo_mismatch_matrix(0.0, geometry), np.eye(geometry.m_sensors))
    d = arraymodel.lo_mismatch_matrix(0.35, geometry)
    assert_allclose(d @ d.conj().T, np.eye(geometry.m_sensors), atol=1e-12)
    assert_allclose(np.diag(d), arraymodel.steering_vector(0.35, geometry).conj())


def test_path_loss_at_reference_distance():
    assert arraymodel.path_loss_db(1.0, PathLoss()) == pytest.approx(-30.0)


def test_path_loss_at_target_disk_center():
    assert arraymodel.path_loss_db(1500.0, PathLoss()) == pytest.approx(-93.52, abs=0.01)


def test_path_loss_drops_six_db_per_doubling():
    pl = PathLoss()
    drop = arraymodel.path_loss_db(2000.0, pl) - arraymodel.path_loss_db(1000.0, pl)
    assert drop == pytest.approx(-20 * math.log10(2), abs=1e-9)


def test_path_loss_rejects_distance_below_reference():
    with pytest.raises(InvalidInputError):
        arraymodel.path_loss_db(0.5, PathLoss())


def test_received_power():
    assert arraymodel.received_power_w(23.0, -30.0) == pytest.approx(10 ** ((23 - 30 - 30) / 10))
    assert arraymodel.received_power_w(30.0, 0.0) == pytest.approx(1.0)


def test_echo_field_amplitude(geometry):
    aperture = geometry.carrier_wavelength ** 2 / (4 * math.pi)
    assert arraymodel.effective_aperture(geometry) == pytest.approx(aperture)
    assert arraymodel.effective_aperture(geometry, 0.02) == 0.02
    expected = math.sqrt(2 * const.physical_constants["characteristic impedance of vacuum"][0] * 1e-9 / aperture)
    assert arraymodel.echo_field_amplitude(1e-9, geometry) == pytest.approx(expected, rel=1e-9)


def test_echo_amplitudes_units(geometry):
    scene = make_scene([0.1, 0.2], distances=(1000.0, 2000.0))
    volts = arraymodel.echo_amplitudes(scene, geometry)
    roots = arraymodel.echo_amplitudes(scene, geometry, field_units=False)
    assert volts[0] > volts[1]
    assert roots[0] / roots[1] == pytest.approx(2.0)
    assert volts[0] / roots[0] == pytest.approx(volts[1] / roots[1])


@pytest.mark.parametrize("waveform", ["gaussian", "constant"])
def test_echo_power_matches_amplitude(waveform):
    echoes = arraymodel.draw_echoes([2.0, 0.5], 40000, trial_generator(1), waveform)
    power = np.mean(np.abs(echoes) ** 2, axis=1)
    assert_allclose(power, [4.0, 0.25], rtol=0.03)


def test_unknown_waveform_is_rejected():
    with pytest.raises(InvalidInputError):
        arraymodel.draw_echoes([1.0], 4, trial_generator(1), "chirp")


def test_drawn_scene_respects_template():
    template = SceneTemplate(
        k_targets=4, doa_range=(-math.radians(60), math.radians(60)), min_separation=math.radians(3.0)
    )
    for seed in range(20):
        scene = arraymodel.draw_scene(template, trial_generator(seed))
        doas = np.array(scene.doas)
        assert len(doas) == 4
        assert np.all(np.diff(np.sin(doas)) >= math.sin(math.radians(3.0)))
        assert arraymodel.sine_separation(doas) >= math.sin(math.radians(3.0))
        assert np.all(np.abs(doas) <= math.radians(60))
        assert all(1000.0 <= u <= 2000.0 for u in scene.distances)
        assert scene.reflected_power_dbm == (23.0,) * 4


def test_near_endfire_pairs_fail_the_separation_guard():
    # two degrees apart in theta, far closer in sin(theta)
    doas = np.radians([-89.16, -86.97])
    assert np.diff(doas)[0] > math.radians(1.0)
    assert arraymodel.sine_separation(doas) < math.sin(math.radians(1.0))
    assert arraymodel.sine_separation([0.3]) == math.inf

    template = SceneTemplate(k_targets=5, doa_range=(-math.radians(89.9), math.radians(89.9)))
    for seed in range(50):
        scene = arraymodel.draw_scene(template, trial_generator(seed))
        assert arraymodel.sine_separation(scene.doas) >= math.sin(math.radians(1.0))


def test_scene_draw_is_deterministic():
    template = SceneTemplate(k_targets=3)
    first = arraymodel.draw_scene(template, trial_generator(5, 0, 1))
    again = arraymodel.draw_scene(template, trial_generator(5, 0, 1))
    other = arraymodel.draw_scene(template, trial_generator(5, 0, 2))
    assert first == again
    assert first.doas != other.doas


def test_pinned_scene_is_used_as_given():
    template = SceneTemplate(k_targets=2, doas=(-0.2, 0.3), distances=(1200.0, 1800.0))
    scene = arraymodel.draw_scene(template, trial_generator(0))
    assert scene.doas == (-0.2, 0.3)
    assert scene.distances == (1200.0, 1800.0)


def test_impossible_separation_is_reported():
    template = SceneTemplate(
        k_targets=3, doa_range=(-math.radians(1), math.radians(1)), min_separation=math.radians(5.0)
    )
    with pytest.raises(InvalidSceneError):
        arraymodel.draw_scene(template, trial_generator(0))


@pytest.mark.parametrize("doas", [
    (0.1, 0.2, 0.3, 0.4, 0.5, 0.6),
    (0.2, 0.2),
    (math.pi / 2,),
])
def test_invalid_scenes_are_rejected(small_geometry, doas):
    with pytest.raises(InvalidSceneError):
        arraymodel.validate_scene(make_scene(doas), small_geometry)


def test_group_split_and_stack():
    y = np.arange(12).reshape(4, 3)
    y1, y2 = arraymodel.split_groups(y)
    assert_allclose(y1, y[:3])
    assert_allclose(y2, y[1:])
    assert arraymodel.stack_groups(y).shape == (6, 3)


def test_noiseless_snapshots_follow_the_model(geometry, lo):
    scene = make_scene([-0.3, 0.4])
    snaps = arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 16, 0.0, (3, 0, 0))
    expected = (
        arraymodel.lo_mismatch_matrix(lo.vartheta, geometry)
        @ arraymodel.steering_matrix(scene.doas, geometry)
        @ snaps.echoes
    )
    assert_allclose(snaps.y, expected, atol=1e-15)
    assert snaps.regime == Regime.PSL
    assert snaps.seed == (3, 0, 0)


def test_snapshot_seed_controls_the_draw(geometry, lo):
    scene = make_scene([0.1])
    first = arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 8, 1e-3, (9, 1, 2))
    again = arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 8, 1e-3, (9, 1, 2))
    other = arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 8, 1e-3, (9, 1, 3))
    assert np.array_equal(first.y, again.y)
    assert not np.allclose(first.y, other.y)


def test_regimes_share_echoes_for_a_seed(geometry, lo):
    scene = make_scene([0.1, 0.5])
    psl = arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 8, 1e-3, (1, 2), Regime.PSL)
    sql = arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 8, 1e-6, (1, 2), Regime.SQL)
    assert np.array_equal(psl.echoes, sql.echoes)


def test_sample_covariance_converges():
    geom = ArrayGeometry.from_carrier(4, CARRIER)
    scene = TargetScene(doas=(0.3,), reflected_power_dbm=(23.0,), distances=(1500.0,))
    lo = LoConfig(omega_l=1.0, f_l=CARRIER, theta_l1=0.0, vartheta=0.2)
    sigma2 = 1e-4
    resp = SensorResponse(rho=4.0, phi_ref=0.5 + 0.5j, kappa=1.0, varphi=0.0)
    snaps = arraymodel.synthesize_snapshots(scene, geom, resp, lo, 100000, sigma2, (11,))

    amp = arraymodel.echo_amplitudes(scene, geom)[0]
    b = math.sqrt(resp.rho) * resp.phi_ref * arraymodel.lo_mismatch_matrix(lo.vartheta, geom) @ (
        arraymodel.steering_vector(0.3, geom)
    )
    expected = amp ** 2 * np.outer(b, b.conj()) + sigma2 * np.eye(4)
    error = np.linalg.norm(snaps.sample_covariance() - expected) / np.linalg.norm(expected)
    assert error < 0.05


def test_snapshot_inputs_are_checked(geometry, lo):
    scene = make_scene([0.1])
    with pytest.raises(InvalidInputError):
        arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 0, 1.0, (1,))
    with pytest.raises(InvalidInputError):
        arraymodel.synthesize_snapshots(scene, geometry, UNIT_RESPONSE, lo, 4, math.inf, (1,))


def test_classical_noise_power():
    rx = ClassicalReceiverConfig(noise_figure_db=7.0, temperature_k=290.0)
    assert arraymodel.classical_noise_power(rx, 100e3) == pytest.approx(
        const.k * 290.0 * 100e3 * 10 ** 0.7, rel=1e-12
    )


def test_classical_noiseless_snapshots_have_rank_one(geometry):
    scene = make_scene([0.2])
    snaps = arraymodel.synthesize_classical_snapshots(
        scene, geometry, ClassicalReceiverConfig(), 12, (4,), sigma2=0.0
    )
    assert snaps.regime == Regime.CLASSICAL
    assert np.linalg.matrix_rank(snaps.y, tol=1e-9 * np.abs(snaps.y).max()) == 1
    assert_allclose(snaps.y, arraymodel.steering_matrix(scene.doas, geometry) @ snaps.echoes)


def test_noise_figure_raises_classical_noise(geometry):
    scene = make_scene([0.2])
    quiet = arraymodel.synthesize_classical_snapshots(scene, geometry, ClassicalReceiverConfig(noise_figure_db=0.0), 4, (1,))
    noisy = arraymodel.synthesize_classical_snapshots(scene, geometry, ClassicalReceiverConfig(noise_figure_db=3.0), 4, (1,))
    assert noisy.sigma2 / quiet.sigma2 == pytest.approx(10 ** 0.3)
