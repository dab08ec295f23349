import math

import numpy as np
import pytest

from kinklab.diagnostics import (DiagnosticsRecord, WeightFamily,
                                 gardner_soliton_mass, left_mass_sums,
                                 modified_mass, monotonicity_audit)
from kinklab.grid import ConstantBackground, Field, Grid
from kinklab.profiles import MultiKinkConfig, eval_gardner_soliton


def _config():
    return MultiKinkConfig("odd", 1.0, (0.05, 0.12), (60.0, 30.0, 0.0),
                           separation=30.0)


def test_weight_family_from_config():
    w = WeightFamily.from_config(_config())
    assert w.speeds == pytest.approx((0.05, 0.12, 2.0 / 9.0))
    assert w.sigma0 == pytest.approx(0.035)
    assert w.n_weights == 2


def test_sigma0_cap_enforced():
    with pytest.raises(ValueError):
        WeightFamily(0.05, (0.05, 0.12), (-60.0, -30.0))


def test_psi_limits_and_third_derivative_bound():
    w = WeightFamily.from_config(_config())
    assert w.psi(-400.0) < 1e-3
    assert w.psi(400.0) > 1 - 1e-3
    x = np.linspace(-50, 50, 2001)
    h = 1e-2
    fd3 = (w.psi(x + 1.5 * h) - 3 * w.psi(x + 0.5 * h)
           + 3 * w.psi(x - 0.5 * h) - w.psi(x - 1.5 * h)) / h**3
    assert np.max(np.abs(w.psi_third(x) - fd3)) < 1e-6
    # |psi'''| <= (sigma0/4) psi', and psi' equals the sech kernel phi
    ratio = np.abs(w.psi_third(x)) / w.phi(x)
    assert np.max(ratio) <= w.sigma0 / 4 + 1e-12


def test_modified_mass_counts_left_components():
    # wide separation so the slow sigmoid tails do not leak between cuts
    config = MultiKinkConfig("odd", 1.0, (0.05, 0.12), (400.0, 200.0, 0.0),
                             separation=200.0)
    w = WeightFamily.from_config(config)
    grid = Grid(4096, 1600.0, x0=-1200.0)
    vals = np.zeros(grid.n)
    for c, x0 in zip(config.scalings, config.shifts[:-1]):
        vals += eval_gardner_soliton(c, 1.0, x0, grid.x)
    ut = Field(grid, vals, ConstantBackground(0.0), 0.0)
    m1 = modified_mass(ut, 1, w)
    m2 = modified_mass(ut, 2, w)
    mass1 = gardner_soliton_mass(0.05, 1.0)
    mass2 = gardner_soliton_mass(0.12, 1.0)
    assert m1 == pytest.approx(mass1, rel=1e-3)
    assert m2 == pytest.approx(mass1 + mass2, rel=1e-3)


def test_monotonicity_audit_on_frozen_field():
    config = _config()
    w = WeightFamily.from_config(config)
    grid = Grid(2048, 600.0, x0=-400.0)
    vals = eval_gardner_soliton(0.05, 1.0, 60.0, grid.x)
    traj = [Field(grid, vals, ConstantBackground(0.0), t) for t in (0.0, 1.0, 2.0)]
    audit = monotonicity_audit(traj, w)
    # a frozen field loses mass only through the weight drifting right past it
    assert audit["min_drop"][1] <= 0.0
    assert audit["min_drop"][1] > -1e-3
    assert audit["sigma0"] == pytest.approx(0.035)


def test_left_mass_sums_monotone():
    d = left_mass_sums((0.05, 0.12), 1.0)
    assert 0 < d[0] < d[1]


def test_record_validation():
    with pytest.raises(ValueError):
        DiagnosticsRecord(0.0, 1.0, 1.0, 1.0, (-0.5,), (0.1,), 0.0)
    with pytest.raises(ValueError):
        DiagnosticsRecord(0.0, 1.0, 1.0, 1.0, (0.5, 0.5), (0.2, 0.1), 0.0)
    rec = DiagnosticsRecord(0.0, 1.0, 1.0, 1.0, (0.5,), (0.1,), 0.0)
    assert rec.csv_header(1).count(",") == rec.csv_row().count(",")
