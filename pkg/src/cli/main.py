"""
RAQ-DOA Command Line
=====================
Runs the named DOA sweeps and the physics inspection table.

Usage:
    raq-doa sweep <power|sensors|targets|samples|doa|phase> [--config FILE]
            [--out DIR] [--seed N] [--trials N] [--workers N] [--plot] [--verbose]
    raq-doa physics [--config FILE] [--out DIR] [--verbose]

Exit status:
    0 success, 1 output error, 2 configuration error, 3 numerical failure
"""
import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..config.config_manager import ConfigValidationError, get_output_dir
from ..config.experiment_config import SWEEP_NAMES, load_experiment_config, physics_grid
from ..core import transducer
from ..core.exceptions import NumericalFailureError, RaqDoaError
from ..core.harness import run_sweep
from ..models.models import ExperimentConfig, Regime
from .output import build_manifest, plot_sweep, write_manifest, write_physics_csv, write_sweep_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_OUTPUT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
MHZ = 2 * math.pi * 1e6


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT)
    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.INFO)


def _log_progress(message: str, current: int, total: int) -> None:
    step = max(1, total // 10)
    if current == total or current % step == 0:
        logger.info(f"Progress {current}/{total} ({message})")


def cmd_sweep(
    name: str,
    config_path: Optional[Path] = None,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    workers: Optional[int] = None,
    plot: bool = False,
) -> int:
    """
    Run one named sweep and write <out>/<name>.csv, manifest.json and
    optionally <out>/<name>.svg.

    Returns:
        Exit status
    """
    overrides = {
        "experiment.master_seed": seed,
        "experiment.trials": trials,
        "experiment.workers": workers,
    }
    try:
        cfg, manager = load_experiment_config(config_path, sweep_name=name, overrides=overrides)
    except ConfigValidationError as e:
        logger.error(str(e))
        return EXIT_CONFIG

    output_dir = get_output_dir(out)
    logger.info(
        f"Sweep '{name}' ({cfg.sweep.variable}): {len(cfg.sweep.grid)} points x {cfg.trials} trials, "
        f"seed {cfg.master_seed}, {cfg.workers} worker(s)"
    )
    try:
        table = run_sweep(cfg, progress_callback=_log_progress)
    except NumericalFailureError as e:
        logger.error(str(e))
        return EXIT_NUMERICAL
    except RaqDoaError as e:
        logger.error(f"Sweep '{name}' failed: {e}")
        return EXIT_NUMERICAL
    for warning in table.report.warnings:
        logger.warning(warning)

    try:
        files = [write_sweep_csv(table, output_dir / f"{name}.csv").name]
        if plot:
            figure = plot_sweep(table, output_dir / f"{name}.svg")
            if figure is not None:
                files.append(figure.name)
        manifest = build_manifest(
            f"sweep {name}", manager.resolved(), output_dir, config_path, files, table.report.to_dict()
        )
        write_manifest(manifest, output_dir)
    except OSError as e:
        logger.error(f"Cannot write results to {output_dir}: {e}")
        return EXIT_OUTPUT
    return EXIT_OK


def physics_rows(cfg: ExperimentConfig, omega_grid: Sequence[float], detunings) -> List[Dict[str, Any]]:
    """
    Front-end quantities with the LO operating point moved across omega_grid,
    for each (delta_p, delta_c, delta_l) row. Angular quantities in rad/s.

    Raises:
        NumericalFailureError: Naming the failing grid point
    """
    rows = []
    volume = transducer.sensor_volume(cfg.optics.beam_radius, cfg.atomic.cell_length)
    for delta_p, delta_c, delta_l in detunings:
        for omega in omega_grid:
            optics = dataclasses.replace(
                cfg.optics, delta_p=delta_p, delta_c=delta_c, delta_l=delta_l, omega_l=float(omega)
            )
            lo = dataclasses.replace(cfg.lo, omega_l=float(omega), delta_l=delta_l)
            try:
                state = transducer.evaluate_front_end(
                    cfg.atomic, optics, cfg.photodetector, lo, cfg.rational, cfg.varphi
                )
                varpi = {}
                for regime in (Regime.PSL, Regime.SQL):
                    power = state.probe_power * transducer.psl_photon_scale(cfg.photodetector)
                    varpi[regime] = transducer.noise_coefficient(
                        regime, cfg.n_samples, cfg.scene.bandwidth, power, state.kappa, state.varphi,
                        cfg.atomic, volume, on_unbounded="inf",
                    )
            except RaqDoaError as e:
                raise NumericalFailureError(
                    f"Physics table failed at omega_rf={omega / MHZ:.6g} MHz, "
                    f"detunings=({delta_p / MHZ:.6g}, {delta_c / MHZ:.6g}, {delta_l / MHZ:.6g}) MHz: {e}"
                ) from e
            rows.append({
                "delta_p_mhz": delta_p / MHZ,
                "delta_c_mhz": delta_c / MHZ,
                "delta_l_mhz": delta_l / MHZ,
                "omega_rf_mhz": float(omega) / MHZ,
                "chi_re": state.chi.real,
                "chi_im": state.chi.imag,
                "chi_deriv_re": state.chi_deriv.real,
                "chi_deriv_im": state.chi_deriv.imag,
                "kappa": state.kappa,
                "varphi": state.varphi,
                "rho": state.rho,
                "phi_ref_re": state.phi_ref.real,
                "phi_ref_im": state.phi_ref.imag,
                "varpi_psl": varpi[Regime.PSL],
                "varpi_sql": varpi[Regime.SQL],
            })
    return rows


def cmd_physics(config_path: Optional[Path] = None, out: Optional[str] = None) -> int:
    """
    Write <out>/physics.csv and manifest.json.

    Returns:
        Exit status
    """
    try:
        cfg, manager = load_experiment_config(config_path)
        grid = physics_grid(manager.resolved())
    except ConfigValidationError as e:
        logger.error(str(e))
        return EXIT_CONFIG

    output_dir = get_output_dir(out)
    try:
        rows = physics_rows(cfg, grid.omega_rf, grid.detunings)
    except NumericalFailureError as e:
        logger.error(str(e))
        return EXIT_NUMERICAL

    try:
        path = write_physics_csv(rows, output_dir / "physics.csv")
        write_manifest(build_manifest("physics", manager.resolved(), output_dir, config_path, [path.name]), output_dir)
    except OSError as e:
        logger.error(f"Cannot write results to {output_dir}: {e}")
        return EXIT_OUTPUT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='raq-doa',
        description='DOA sweeps and physics tables for Rydberg atomic quantum arrays',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest='command', required=True)

    sweep = sub.add_parser('sweep', help='Run a named Monte Carlo sweep')
    sweep.add_argument('name', choices=SWEEP_NAMES, help='Sweep to run')
    sweep.add_argument('--config', '-c', type=Path, help='Config or manifest file (default: built-in defaults)')
    sweep.add_argument('--out', '-o', help='Output directory (default: $RAQ_DOA_OUTPUT_DIR or ./results)')
    sweep.add_argument('--seed', type=int, help='Master seed (unsigned 64-bit)')
    sweep.add_argument('--trials', type=int, help='Trials per grid point')
    sweep.add_argument('--workers', type=int, help='Worker threads')
    sweep.add_argument('--plot', action='store_true', help='Also write an SVG plot')
    sweep.add_argument('--verbose', '-v', action='store_true', help='Debug logging')

    physics = sub.add_parser('physics', help='Tabulate susceptibility, responsivity and noise coefficients')
    physics.add_argument('--config', '-c', type=Path, help='Config or manifest file (default: built-in defaults)')
    physics.add_argument('--out', '-o', help='Output directory (default: $RAQ_DOA_OUTPUT_DIR or ./results)')
    physics.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if args.command == 'sweep':
        return cmd_sweep(args.name, args.config, args.out, args.seed, args.trials, args.workers, args.plot)
    return cmd_physics(args.config, args.out)


if __name__ == '__main__':
    sys.exit(main())
