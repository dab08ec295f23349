import json

import numpy as np
import pytest

from kinklab.cli import main
from kinklab.grid import ConstantBackground, Field, Grid
from kinklab.io import read_trajectory, write_json, write_trajectory
from kinklab.scenarios import perturbation_samples


def test_trajectory_round_trip(tmp_path):
    grid = Grid(256, 50.0, x0=-25.0)
    fields = [Field(grid, np.sin(grid.x) * t, ConstantBackground(0.0), t)
              for t in (0.0, 0.5)]
    path = tmp_path / "traj.bin"
    write_trajectory(path, fields)
    back = read_trajectory(path)
    assert len(back) == 2
    assert back[1].t == 0.5
    assert np.array_equal(back[1].values, fields[1].values)


def test_perturbations_are_normalized_and_seeded():
    grid = Grid(1024, 200.0, x0=-100.0)
    for shape in ("bump", "noise"):
        w = perturbation_samples(grid, shape, 0.01, seed=7)
        from kinklab.grid import spectral_derivative
        wx = spectral_derivative(w, grid, 1)
        assert np.sqrt(grid.integrate(w**2 + wx**2)) == pytest.approx(0.01)
    a = perturbation_samples(grid, "noise", 0.01, seed=7)
    b = perturbation_samples(grid, "noise", 0.01, seed=7)
    c = perturbation_samples(grid, "noise", 0.01, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_cli_identities_writes_artifacts(tmp_path, capsys):
    code = main(["identities", "--out", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "identities.json").read_text())
    assert all(c["passed"] for c in data["checks"])
    out = capsys.readouterr().out
    assert "[PASS]" in out


def test_cli_report_aggregates(tmp_path, capsys):
    main(["identities", "--out", str(tmp_path)])
    code = main(["report", "--out", str(tmp_path)])
    assert code == 0
    assert "checks passed" in capsys.readouterr().out


def test_cli_missing_config_is_config_error(tmp_path):
    code = main(["identities", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)])
    assert code == 2


def test_cli_bad_option_is_config_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_json(cfg, {"identities": {"bogus_option": 1}})
    code = main(["identities", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 2


def test_cli_stability_csv_deterministic(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_json(cfg, {"stability_even": {
        "alphas": [0.02], "horizon": 2.0, "dt": 0.01, "n": 1024}})
    for sub in ("a", "b"):
        code = main(["stability", "--parity", "even", "--config", str(cfg),
                     "--seed", "3", "--out", str(tmp_path / sub)])
        assert code == 0
    csv_a = (tmp_path / "a" / "stability_even_tracks.csv").read_bytes()
    csv_b = (tmp_path / "b" / "stability_even_tracks.csv").read_bytes()
    assert csv_a == csv_b
