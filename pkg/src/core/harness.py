"""
Experiment Harness Module
==========================
Monte Carlo runner for DOA sweeps: per-trial scene drawing, snapshot
synthesis for each noise regime, estimation, assignment-matched scoring and
deterministic reduction into a result table.
"""
import dataclasses
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..models.models import ExperimentConfig, Regime, SensorResponse, SnapshotMatrix, TargetScene
from ..utils.rng import stream_seed, trial_generator
from ..utils.validators import ValidationReport
from . import estimators as est
from .arraymodel import (
    classical_noise_power,
    draw_scene,
    echo_amplitudes,
    effective_aperture,
    synthesize_classical_snapshots,
    synthesize_snapshots,
)
from .exceptions import InvalidInputError, NumericalFailureError, RaqDoaError, UnboundedNoiseError
from .transducer import (
    COS_ZERO_TOL,
    FrontEndState,
    evaluate_front_end,
    noise_coefficient,
    noise_power,
    Z0,
    psl_photon_scale,
    sensor_volume,
)

logger = logging.getLogger(__name__)

ESTIMATORS = ("raq_esprit", "classical_esprit", "raq_ml", "ml_bound", "crlb")
TEMPLATE_BOUNDS = ("ml_bound_template", "crlb_template")

# Excluded-trial fraction above which a grid point is flagged
EXCLUSION_LIMIT = 0.01

ProgressCallback = Callable[[str, int, int], None]


@dataclass
class TrialResult:
    """Squared error of one estimator on one regime in one trial."""
    sweep_value: float
    estimator: str
    regime: Regime
    squared_error: float
    converged: bool
    seed: Tuple[int, ...]
    unbounded: bool = False
    error: Optional[str] = None


@dataclass(frozen=True)
class RegimeFrontEnd:
    """Noise setting of one regime at one grid point."""
    regime: Regime
    response: SensorResponse
    varpi: float
    sigma2: float

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.varpi)


@dataclass(frozen=True)
class SweepRow:
    """One aggregated line of the result table."""
    sweep_var: str
    value: float
    estimator: str
    regime: str
    mse: float
    trials: int
    excluded: int
    seed: int


@dataclass
class SweepTable:
    """Aggregated sweep results."""
    variable: str
    rows: List[SweepRow] = field(default_factory=list)
    report: ValidationReport = field(default_factory=ValidationReport)
    duration_s: float = 0.0

    def lookup(self, value: float, estimator: str, regime: Union[Regime, str]) -> Optional[SweepRow]:
        regime_name = regime.value if isinstance(regime, Regime) else regime
        for row in self.rows:
            if row.value == value and row.estimator == estimator and row.regime == regime_name:
                return row
        return None

    def series(self, estimator: str, regime: Union[Regime, str]) -> List[Tuple[float, float]]:
        """(value, mse) pairs of one estimator/regime, in grid order."""
        regime_name = regime.value if isinstance(regime, Regime) else regime
        return [(r.value, r.mse) for r in self.rows if r.estimator == estimator and r.regime == regime_name]


def mse(estimated: Union[est.DoaEstimate, Sequence[float]], truth: Sequence[float]) -> float:
    """
    Squared DOA error under the best target-to-estimate assignment.

    Raises:
        InvalidInputError: If lengths differ
    """
    estimate = np.asarray(estimated.doas if isinstance(estimated, est.DoaEstimate) else estimated, dtype=float)
    target = np.asarray(truth, dtype=float)
    if estimate.shape != target.shape:
        raise InvalidInputError(f"Estimate has {estimate.size} DOAs, truth has {target.size}")
    cost = (target[:, np.newaxis] - estimate[np.newaxis, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def apply_sweep_value(cfg: ExperimentConfig, value: float) -> ExperimentConfig:
    """
    Return a copy of cfg with the swept variable set to value.

    Grid values are in display units: dBm, counts, degrees (DOA half-range
    and varphi).
    """
    if cfg.sweep is None:
        return cfg
    variable = cfg.sweep.variable
    if variable == "reflected_power":
        return dataclasses.replace(cfg, scene=dataclasses.replace(cfg.scene, reflected_power_dbm=float(value)))
    if variable == "m_sensors":
        return dataclasses.replace(cfg, geometry=dataclasses.replace(cfg.geometry, m_sensors=int(value)))
    if variable == "k_targets":
        return dataclasses.replace(cfg, scene=dataclasses.replace(cfg.scene, k_targets=int(value)))
    if variable == "n_samples":
        return dataclasses.replace(cfg, n_samples=int(value))
    if variable == "doa_range":
        half = math.radians(float(value))
        return dataclasses.replace(cfg, scene=dataclasses.replace(cfg.scene, doa_range=(-half, half)))
    if variable == "varphi":
        return dataclasses.replace(cfg, varphi=math.radians(float(value)))
    raise InvalidInputError(f"Unknown sweep variable '{variable}'")


def build_front_end(cfg: ExperimentConfig) -> Dict[Regime, RegimeFrontEnd]:
    """
    Per-regime response and noise level shared by all trials of a grid point.

    An unbounded PSL coefficient becomes inf, or raises UnboundedNoiseError
    under unbounded_policy "error".

    The CLASSICAL entry carries a unit response and the thermal noise power;
    its varpi is sigma^2 / (2N) on the sqrt(W) scale.
    """
    n = cfg.n_samples
    bandwidth = cfg.scene.bandwidth
    result: Dict[Regime, RegimeFrontEnd] = {}

    raq_regimes = [r for r in cfg.regimes if r != Regime.CLASSICAL]
    if raq_regimes:
        state: FrontEndState = evaluate_front_end(
            cfg.atomic, cfg.optics, cfg.photodetector, cfg.lo, cfg.rational, cfg.varphi
        )
        volume = sensor_volume(cfg.optics.beam_radius, cfg.atomic.cell_length)
        for regime in raq_regimes:
            override = cfg.noise_variance_override.get(regime.value)
            if override is not None:
                varpi = override / (2 * n)
                if regime == Regime.PSL:
                    cos = math.cos(state.varphi)
                    if abs(cos) < COS_ZERO_TOL:
                        if cfg.unbounded_policy == "error":
                            raise UnboundedNoiseError(f"PSL noise diverges at varphi={state.varphi:.6f} rad")
                        varpi = math.inf
                    else:
                        varpi = varpi / cos ** 2
            else:
                power = state.probe_power * psl_photon_scale(cfg.photodetector)
                varpi = noise_coefficient(
                    regime, n, bandwidth, power, state.kappa, state.varphi, cfg.atomic, volume,
                    on_unbounded=cfg.unbounded_policy,
                )
            sigma2 = math.inf if math.isinf(varpi) else noise_power(varpi, n, state.rho, state.phi_ref)
            result[regime] = RegimeFrontEnd(regime, state.response, varpi, sigma2)
            logger.debug(f"{regime.value}: varpi={varpi:.4e}, sigma2={sigma2:.4e}")

    if Regime.CLASSICAL in cfg.regimes:
        sigma2 = cfg.noise_variance_override.get(
            Regime.CLASSICAL.value, classical_noise_power(cfg.classical, bandwidth)
        )
        unit = SensorResponse(rho=1.0, phi_ref=1.0 + 0j, kappa=0.0, varphi=0.0)
        result[Regime.CLASSICAL] = RegimeFrontEnd(Regime.CLASSICAL, unit, sigma2 / (2 * n), sigma2)
    return result


def field_noise_coefficient(cfg: ExperimentConfig, fe: RegimeFrontEnd) -> float:
    """
    Noise coefficient of a regime on the RAQ field scale.

    RAQ regimes return varpi unchanged. The classical receiver's thermal
    noise is mapped through the isotropic aperture and the antenna gain, so
    equal values mean equal per-snapshot SNR and the ratio of two values
    predicts the high-SNR MSE ratio.
    """
    if fe.regime != Regime.CLASSICAL:
        return fe.varpi
    gain = 10 ** ((cfg.classical.antenna_gain_db + cfg.classical.rx_gain_db) / 10)
    aperture = effective_aperture(cfg.geometry, cfg.scene.effective_aperture)
    return Z0 * fe.sigma2 / (aperture * cfg.n_samples * gain)


def _grid_index(cfg: ExperimentConfig, sweep_value: Optional[float]) -> int:
    if cfg.sweep is None or sweep_value is None:
        return 0
    for index, value in enumerate(cfg.sweep.grid):
        if value == sweep_value:
            return index
    raise InvalidInputError(f"Value {sweep_value} is not on the sweep grid")


def _template_covariance(scene: TargetScene, cfg: ExperimentConfig, regime: Regime) -> np.ndarray:
    if regime == Regime.CLASSICAL:
        gain = 10 ** ((cfg.classical.antenna_gain_db + cfg.classical.rx_gain_db) / 10)
        return np.diag(gain * echo_amplitudes(scene, cfg.geometry, field_units=False) ** 2).astype(complex)
    return est.expected_source_covariance(scene, cfg.geometry)


def _score_regime(
    cfg: ExperimentConfig,
    regime: Regime,
    fe: RegimeFrontEnd,
    scene: TargetScene,
    snapshots: SnapshotMatrix,
    record: Callable[..., None],
) -> None:
    k = scene.k_targets
    geom = cfg.geometry
    vartheta = 0.0 if regime == Regime.CLASSICAL else cfg.lo.vartheta

    for name in cfg.estimators:
        try:
            if name == "raq_esprit":
                if regime == Regime.CLASSICAL:
                    continue
                estimate = est.esprit_from_snapshots(snapshots, k, geom, vartheta)
                record(name, mse(estimate, scene.doas), estimate.converged)
            elif name == "classical_esprit":
                estimate = est.esprit_from_snapshots(snapshots, k, geom, None)
                record(name, mse(estimate, scene.doas), estimate.converged)
            elif name == "raq_ml":
                if k > est.MlSearchOptions.max_targets:
                    continue
                estimate = est.raq_ml(snapshots, k, geom, vartheta, est.MlSearchOptions(grid_step=cfg.ml_grid_step))
                record(name, mse(estimate, scene.doas), estimate.converged)
            elif name in ("ml_bound", "crlb"):
                r_s = snapshots.echoes @ snapshots.echoes.conj().T / cfg.n_samples
                if name == "ml_bound":
                    value = est.ml_asymptotic_error(scene, geom, fe.varpi, cfg.n_samples, r_s, vartheta)
                else:
                    value = est.crlb(scene, geom, fe.varpi, r_s, vartheta)
                record(name, value, True)
        except RaqDoaError as e:
            record(name, math.nan, False, str(e))

    if cfg.scene.doas is not None:
        r_template = _template_covariance(scene, cfg, regime)
        ml_name, crlb_name = TEMPLATE_BOUNDS
        try:
            record(ml_name, est.ml_asymptotic_error(scene, geom, fe.varpi, cfg.n_samples, r_template, vartheta), True)
            record(crlb_name, est.crlb(scene, geom, fe.varpi, r_template, vartheta), True)
        except RaqDoaError as e:
            for name in TEMPLATE_BOUNDS:
                record(name, math.nan, False, str(e))


def run_trial(
    cfg: ExperimentConfig,
    sweep_value: Optional[float],
    trial_index: int,
    front_end: Optional[Dict[Regime, RegimeFrontEnd]] = None,
    grid_index: Optional[int] = None,
) -> List[TrialResult]:
    """
    One Monte Carlo trial: draw a scene, synthesize each regime, estimate, score.

    The scene comes from stream (master_seed, trial_index), so trial t sees
    the same targets at every grid point; echoes and noise come from
    (master_seed, grid_index, trial_index, 1).

    Args:
        cfg: Experiment config (the sweep value is applied here)
        sweep_value: Grid value, or None without a sweep
        trial_index: Trial number within the grid point
        front_end: Precomputed build_front_end() result for this grid point
        grid_index: Position of sweep_value on the grid (looked up when None)

    Returns:
        One TrialResult per estimator and regime
    """
    point = apply_sweep_value(cfg, sweep_value) if sweep_value is not None else cfg
    g = _grid_index(cfg, sweep_value) if grid_index is None else grid_index
    front_end = front_end if front_end is not None else build_front_end(point)

    # the scene is shared by every grid point; echoes and noise are not
    scene = draw_scene(point.scene, trial_generator(point.master_seed, trial_index))
    seed = stream_seed(point.master_seed, g, trial_index, 1)
    value = math.nan if sweep_value is None else float(sweep_value)
    results: List[TrialResult] = []

    for regime in point.regimes:
        fe = front_end[regime]

        def record(name: str, sq: float, converged: bool, error: Optional[str] = None) -> None:
            results.append(TrialResult(value, name, regime, sq, converged, seed, unbounded=math.isinf(sq), error=error))

        if fe.unbounded:
            for name in point.estimators:
                if name == "raq_esprit" and regime == Regime.CLASSICAL:
                    continue
                if name != "raq_ml" or scene.k_targets <= est.MlSearchOptions.max_targets:
                    record(name, math.inf, True)
            continue

        if regime == Regime.CLASSICAL:
            override = point.noise_variance_override.get(Regime.CLASSICAL.value)
            snapshots = synthesize_classical_snapshots(
                scene, point.geometry, point.classical, point.n_samples, seed, sigma2=override
            )
        else:
            snapshots = synthesize_snapshots(
                scene, point.geometry, fe.response, point.lo, point.n_samples, fe.sigma2, seed, regime
            )
        _score_regime(point, regime, fe, scene, snapshots, record)
    return results


def _reduce(
    variable: str, value: float, master_seed: int, results: List[TrialResult], report: ValidationReport
) -> List[SweepRow]:
    groups: Dict[Tuple[str, str], List[TrialResult]] = {}
    for r in results:
        groups.setdefault((r.estimator, r.regime.value), []).append(r)

    rows = []
    for (estimator, regime), group in sorted(groups.items()):
        included = [r for r in group if r.converged and not math.isnan(r.squared_error)]
        excluded = len(group) - len(included)
        if any(r.unbounded for r in included):
            value_mse = math.inf
        elif included:
            value_mse = float(np.mean([r.squared_error for r in included]))
        else:
            value_mse = math.nan
        if group and excluded / len(group) >= EXCLUSION_LIMIT:
            report.add_warning(
                f"{estimator}/{regime} at {variable}={value:g}: {excluded} of {len(group)} trials excluded"
            )
        if any(r.unbounded for r in included):
            report.add_info(f"{estimator}/{regime} unbounded at {variable}={value:g}")
        rows.append(SweepRow(variable, value, estimator, regime, value_mse, len(included), excluded, master_seed))
    return rows


def run_sweep(cfg: ExperimentConfig, progress_callback: Optional[ProgressCallback] = None) -> SweepTable:
    """
    Run every grid point of cfg.sweep with cfg.trials trials each.

    Trials run on a thread pool of cfg.workers threads; results are reduced
    in (grid index, trial index) order so the table does not depend on
    completion order.

    Raises:
        InvalidInputError: If cfg has no sweep
        NumericalFailureError: With the failing grid point named
    """
    if cfg.sweep is None:
        raise InvalidInputError("run_sweep needs a sweep specification")

    start = time.time()
    table = SweepTable(variable=cfg.sweep.variable)
    if "raq_ml" in cfg.estimators:
        table.report.add_info(f"raq_ml runs only where K <= {est.MlSearchOptions.max_targets}")
    if cfg.scene.doas is None:
        logger.debug(f"Scene DOAs are drawn per trial; {', '.join(TEMPLATE_BOUNDS)} rows are skipped")
    total = len(cfg.sweep.grid) * cfg.trials
    done = 0

    for g, value in enumerate(cfg.sweep.grid):
        point = apply_sweep_value(cfg, value)
        try:
            front_end = build_front_end(point)
        except RaqDoaError as e:
            raise NumericalFailureError(f"Front end failed at {cfg.sweep.variable}={value}: {e}") from e
        levels = ", ".join(f"{r.value}={field_noise_coefficient(point, fe):.3e}" for r, fe in front_end.items())
        logger.debug(f"{cfg.sweep.variable}={value}: field-scale noise {levels}")

        by_trial: Dict[int, List[TrialResult]] = {}
        with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as executor:
            futures = {
                executor.submit(run_trial, cfg, value, t, front_end, g): t for t in range(cfg.trials)
            }
            for future in as_completed(futures):
                t = futures[future]
                try:
                    by_trial[t] = future.result()
                except RaqDoaError as e:
                    raise NumericalFailureError(
                        f"Trial {t} failed at {cfg.sweep.variable}={value}: {e}"
                    ) from e
                done += 1
                if progress_callback:
                    progress_callback(f"{cfg.sweep.variable}={value}", done, total)

        ordered = [r for t in sorted(by_trial) for r in by_trial[t]]
        table.rows.extend(_reduce(cfg.sweep.variable, float(value), cfg.master_seed, ordered, table.report))

    table.rows.sort(key=lambda r: (r.value, r.estimator, r.regime))
    table.duration_s = time.time() - start
    logger.info(f"Sweep '{cfg.sweep.variable}' finished: {len(table.rows)} rows in {table.duration_s:.1f}s")
    return table


def fold_ratio(table: SweepTable, value: float, regime: Union[Regime, str]) -> float:
    """
    Classical-array MSE over RAQ-ESPRIT MSE at one grid point.

    Compares classical ESPRIT on CLASSICAL data against RAQ-ESPRIT in regime.
    """
    classical = table.lookup(value, "classical_esprit", Regime.CLASSICAL)
    raq = table.lookup(value, "raq_esprit", regime)
    if classical is None or raq is None:
        raise InvalidInputError(f"Table lacks classical/RAQ-ESPRIT rows at value {value}")
    if raq.mse == 0:
        return math.inf
    return classical.mse / raq.mse
