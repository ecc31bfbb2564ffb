"""
Output Module
==============
CSV tables, run manifests and plots written by the command-line front end.
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from .. import __version__
from ..core.harness import SweepTable

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("sweep_var", "value", "estimator", "regime", "mse", "trials", "excluded", "seed")
PHYSICS_COLUMNS = (
    "delta_p_mhz", "delta_c_mhz", "delta_l_mhz", "omega_rf_mhz",
    "chi_re", "chi_im", "chi_deriv_re", "chi_deriv_im",
    "kappa", "varphi", "rho", "phi_ref_re", "phi_ref_im", "varpi_psl", "varpi_sql",
)
MANIFEST_NAME = "manifest.json"


def format_value(value: Any) -> str:
    """Shortest round-trip text for floats ('inf', 'nan' literals); str otherwise."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    logger.info(f"Wrote {path}")
    return path


def write_sweep_csv(table: SweepTable, path: Path) -> Path:
    """One line per (value, estimator, regime)."""
    return _write_rows(
        path,
        SWEEP_COLUMNS,
        ((r.sweep_var, r.value, r.estimator, r.regime, r.mse, r.trials, r.excluded, r.seed) for r in table.rows),
    )


def write_physics_csv(rows: List[Dict[str, Any]], path: Path) -> Path:
    """Rows keyed by PHYSICS_COLUMNS."""
    return _write_rows(path, PHYSICS_COLUMNS, ([row[c] for c in PHYSICS_COLUMNS] for row in rows))


def build_manifest(
    command: str,
    resolved_config: Dict[str, Any],
    output_dir: Path,
    config_path: Optional[Path] = None,
    files: Sequence[str] = (),
    report: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Run manifest; loading it as a config replays the run exactly.
    """
    return {
        "artifact": "raq-doa",
        "version": __version__,
        "command": command,
        "config_path": str(config_path) if config_path else None,
        "master_seed": resolved_config.get("experiment", {}).get("master_seed"),
        "output_dir": str(output_dir),
        "files": list(files),
        "report": report or {},
        "resolved_config": resolved_config,
    }


def write_manifest(manifest: Dict[str, Any], output_dir: Path) -> Path:
    path = Path(output_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(manifest, f, indent=2)
        f.write('\n')
    logger.info(f"Wrote {path}")
    return path


def plot_sweep(table: SweepTable, path: Path) -> Optional[Path]:
    """
    Semilog-y plot of MSE against the swept value per estimator/regime.

    Returns:
        Path of the figure, or None if plotting failed
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception as e:
        logger.warning(f"Plotting unavailable, continuing without {path}: {e}")
        return None

    fig = None
    try:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        series = sorted({(r.estimator, r.regime) for r in table.rows})
        for estimator, regime in series:
            points = [
                (v, m) for v, m in table.series(estimator, regime) if math.isfinite(m) and m > 0
            ]
            if points:
                xs, ys = zip(*points)
                ax.semilogy(xs, ys, marker="o", label=f"{estimator} ({regime})")
        ax.set_xlabel(table.variable)
        ax.set_ylabel("MSE (rad$^2$)")
        ax.grid(True, which="both", alpha=0.3)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.tight_layout()
        fig.savefig(path, bbox_inches="tight")
        logger.info(f"Figure saved to {path}")
        return path
    except Exception as e:
        logger.warning(f"Plotting failed, continuing without {path}: {e}")
        return None
    finally:
        if fig is not None:
            plt.close(fig)
