"""End-to-end tests of the raq-doa command line."""
import csv
import json
import importlib
import math

import matplotlib.pyplot as plt
import pytest
from matplotlib.figure import Figure

cli = importlib.import_module("src.cli.main")
from src.cli.output import MANIFEST_NAME, PHYSICS_COLUMNS, SWEEP_COLUMNS, format_value, plot_sweep
from src.core.harness import SweepRow, SweepTable

TINY = {
    "array": {"m_sensors": 6},
    "scene": {"k_targets": 2, "doa_range_deg": [-60.0, 60.0], "min_separation_deg": 5.0},
    "experiment": {
        "trials": 3,
        "n_samples": 20,
        "master_seed": 11,
        "estimators": ["raq_esprit", "classical_esprit", "crlb"],
    },
    "sweeps": {"power": {"variable": "reflected_power", "grid": [0.0, 20.0]}},
    "physics": {"omega_rf_points": 4, "detunings_mhz": [[-0.9133, 1.8090, -0.0075]]},
}


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY), encoding="utf-8")
    return path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_sweep_writes_table_and_manifest(tiny_config, tmp_path):
    out = tmp_path / "run"
    assert cli.main(["sweep", "power", "--config", str(tiny_config), "--out", str(out)]) == cli.EXIT_OK

    header = (out / "power.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(SWEEP_COLUMNS)
    rows = read_rows(out / "power.csv")
    # PSL and SQL carry three estimators, CLASSICAL two; two grid points
    assert len(rows) == 16
    assert {r["seed"] for r in rows} == {"11"}
    assert all(int(r["trials"]) + int(r["excluded"]) == 3 for r in rows)

    manifest = json.loads((out / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest["master_seed"] == 11
    assert manifest["files"] == ["power.csv"]
    assert manifest["resolved_config"]["experiment"]["trials"] == 3


def test_manifest_replay_reproduces_the_table(tiny_config, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert cli.main(["sweep", "power", "--config", str(tiny_config), "--out", str(first)]) == cli.EXIT_OK
    replay = ["sweep", "power", "--config", str(first / MANIFEST_NAME), "--out", str(second)]
    assert cli.main(replay) == cli.EXIT_OK
    assert (first / "power.csv").read_bytes() == (second / "power.csv").read_bytes()


def test_command_line_seed_and_trials(tiny_config, tmp_path):
    out = tmp_path / "seeded"
    argv = ["sweep", "power", "--config", str(tiny_config), "--out", str(out), "--seed", "5", "--trials", "2"]
    assert cli.main(argv) == cli.EXIT_OK
    rows = read_rows(out / "power.csv")
    assert {r["seed"] for r in rows} == {"5"}
    assert all(int(r["trials"]) + int(r["excluded"]) == 2 for r in rows)


def test_sweep_plot(tiny_config, tmp_path):
    out = tmp_path / "plotted"
    assert cli.main(["sweep", "power", "--config", str(tiny_config), "--out", str(out), "--plot"]) == cli.EXIT_OK
    assert (out / "power.svg").exists()


def test_broken_config_exits_with_config_status(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    assert cli.main(["sweep", "power", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["physics", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_invalid_values_exit_with_config_status(tmp_path):
    path = tmp_path / "invalid.json"
    path.write_text(json.dumps({"experiment": {"trials": 0}}), encoding="utf-8")
    assert cli.main(["sweep", "power", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_unknown_sweep_name_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["sweep", "spiral"])
    assert info.value.code == 2


def test_physics_table(tiny_config, tmp_path):
    out = tmp_path / "physics"
    assert cli.main(["physics", "--config", str(tiny_config), "--out", str(out)]) == cli.EXIT_OK
    rows = read_rows(out / "physics.csv")
    assert list(rows[0]) == list(PHYSICS_COLUMNS)
    assert len(rows) == 4

    chi_scale = max(math.hypot(float(r["chi_re"]), float(r["chi_im"])) for r in rows)
    ratios = []
    for r in rows:
        assert float(r["chi_im"]) >= -1e-9 * chi_scale
        slope = math.hypot(float(r["chi_deriv_re"]), float(r["chi_deriv_im"]))
        ratios.append(float(r["kappa"]) / slope)
        assert float(r["varpi_sql"]) > 0
    assert max(ratios) == pytest.approx(min(ratios), rel=1e-9)


def test_format_value():
    assert format_value(0.1) == "0.1"
    assert format_value(math.inf) == "inf"
    assert format_value(math.nan) == "nan"
    assert format_value(True) == "true"
    assert format_value(7) == "7"


def test_failed_save_still_closes_the_figure(monkeypatch, tmp_path):
    def refuse(self, *args, **kwargs):
        raise OSError("read-only file system")

    monkeypatch.setattr(Figure, "savefig", refuse)
    table = SweepTable(
        variable="reflected_power",
        rows=[SweepRow("reflected_power", 0.0, "crlb", "PSL", 1e-6, 3, 0, 11)],
    )
    plt.close("all")
    assert plot_sweep(table, tmp_path / "power.svg") is None
    assert plt.get_fignums() == []
