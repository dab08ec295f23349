import numpy as np
import pytest

from kinklab.diagnostics import WeightFamily
from kinklab.grid import Grid
from kinklab.modulation import (OutOfTubeError, QuadraticFormSpec,
                                assemble_form, coercivity_estimate,
                                fit_modulation, form_value,
                                localization_weight)
from kinklab.profiles import MultiKinkConfig, build_multikink_profile


def _config(shifts=(60.0, 30.0, 0.0)):
    return MultiKinkConfig("odd", 1.0, (0.05, 0.12), shifts, separation=30.0)


GRID = Grid(4096, 512.0, x0=-340.0)


def test_fit_recovers_shifted_profile():
    config = _config()
    target = _config(shifts=(60.8, 29.5, 0.3))
    u = build_multikink_profile(target, GRID, 0.0)
    state = fit_modulation(u, config)
    assert state.shifts == pytest.approx(target.shifts, abs=1e-9)
    assert state.scalings == pytest.approx(target.scalings, abs=1e-10)
    assert state.residual_h1 < 1e-8


def test_fit_recovers_scaling_change():
    config = _config()
    target = MultiKinkConfig("odd", 1.0, (0.052, 0.117), config.shifts,
                             separation=30.0)
    u = build_multikink_profile(target, GRID, 0.0)
    state = fit_modulation(u, config)
    assert state.scalings == pytest.approx((0.052, 0.117), abs=1e-9)


def test_fit_translation_equivariance():
    config = _config()
    u = build_multikink_profile(config, GRID, 0.0)
    state0 = fit_modulation(u, config)
    state1 = fit_modulation(u.shifted(2.0), config)
    expect = tuple(x - 2.0 for x in state0.shifts)
    assert state1.shifts == pytest.approx(expect, abs=1e-8)


def test_fit_frozen_scalings_only_imposes_translations():
    config = _config()
    u = build_multikink_profile(_config(shifts=(59.0, 31.0, -0.5)), GRID, 0.0)
    state = fit_modulation(u, config, fit_scalings=False)
    assert state.scalings == config.scalings
    assert state.shifts == pytest.approx((59.0, 31.0, -0.5), abs=1e-9)


def test_fit_rejects_garbage():
    config = _config()
    rng = np.random.default_rng(0)
    from kinklab.grid import Field, KinkBackground
    bg = KinkBackground(config.kink_scaling, 0.0)
    u = Field(GRID, bg.eval(GRID.x) + rng.standard_normal(GRID.n), bg, 0.0)
    with pytest.raises(OutOfTubeError):
        fit_modulation(u, config, max_iter=8)


def test_localization_weight_envelope():
    s = np.linspace(0.0, 400.0, 4001)
    for b in (5.0, 20.0):
        w = localization_weight(s, b)
        a = np.abs(s) / b
        assert np.all(w >= np.exp(-a) - 1e-12)
        assert np.all(w <= 3.1 * np.exp(-a) + 1e-12)
        assert np.all(w[s <= b] == 1.0)


def test_form_matrix_matches_integrand():
    grid = Grid(512, 150.0, x0=-75.0)
    spec = QuadraticFormSpec("kink", grid, 1.0 / 9.0)
    a, _ = assemble_form(spec)
    rng = np.random.default_rng(1)
    z = rng.standard_normal(grid.n)
    assert z @ a @ z == pytest.approx(form_value(spec, z), rel=1e-10)


def test_kink_form_coercive_with_zero_mode_resolved():
    grid = Grid(512, 150.0, x0=-75.0)
    spec = QuadraticFormSpec("kink", grid, 1.0 / 9.0)
    constrained = coercivity_estimate(spec)["lambda0"]
    free = coercivity_estimate(spec, constrained=False)["lambda0"]
    assert constrained > 0.05
    assert abs(free) < 1e-8


def test_multikink_form_positive():
    config = _config()
    weights = WeightFamily.from_config(config)
    grid = Grid(512, 320.0, x0=-220.0)
    spec = QuadraticFormSpec("multikink", grid, config.kink_scaling,
                             config=config, weights=weights)
    assert coercivity_estimate(spec)["lambda0"] > 0.0
