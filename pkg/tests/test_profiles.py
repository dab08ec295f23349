import math
import warnings

import numpy as np
import pytest

from kinklab.grid import Grid, KinkBackground
from kinklab.nonlinearity import HypothesisError, Nonlinearity
from kinklab.profiles import (GardnerFamily, MultiKinkConfig, PowerFamily,
                              build_multikink_profile, eval_even_two_kink,
                              eval_even_two_kink_gardner_form,
                              eval_gardner_soliton, eval_kink, gardner_rho,
                              kink_energy, solve_generalized_kink,
                              solve_ground_state, weinstein_check)


def test_kink_solves_traveling_ode():
    c = 0.2
    grid = Grid(1024, 120.0, x0=-60.0)
    from kinklab.grid import spectral_derivative
    bg = KinkBackground(c, 0.0)
    phi = bg.eval(grid.x)
    res = bg.deriv(grid.x, 2) - (phi**3 - c * phi)
    assert np.max(np.abs(res)) < 1e-10


def test_gardner_soliton_peak_and_rho():
    c, beta = 0.1, 1.0
    rho = gardner_rho(c, beta)
    assert rho == pytest.approx(math.sqrt(1 - 4.5 * beta * c))
    q = eval_gardner_soliton(c, beta, 0.0, np.array([0.0]))
    assert q[0] == pytest.approx(3 * c / (1 + rho))


def test_gardner_scaling_out_of_range():
    with pytest.raises(ValueError):
        eval_gardner_soliton(0.3, 1.0, 0.0, np.zeros(3))


def test_family_derivatives_match_finite_differences():
    for fam, c in ((GardnerFamily(1.0), 0.08), (PowerFamily(4), 0.3)):
        s = np.linspace(-10, 10, 101)
        h = 1e-6
        fd_s = (fam.value(c, s + h) - fam.value(c, s - h)) / (2 * h)
        assert np.max(np.abs(fam.ds(c, s) - fd_s)) < 1e-7
        fd_c = (fam.value(c + h, s) - fam.value(c - h, s)) / (2 * h)
        assert np.max(np.abs(fam.dc(c, s) - fd_c)) < 1e-6


def test_two_kink_representations_agree():
    grid = Grid(2048, 300.0, x0=-150.0)
    for beta, c in ((1.0, 0.05), (0.5, 0.3)):
        a = eval_even_two_kink(beta, c, 0.7, 1.3, grid.x)
        b = eval_even_two_kink_gardner_form(beta, c, 0.7, 1.3, grid.x)
        assert np.max(np.abs(a - b)) < 1e-13


def test_quadrature_kink_matches_tanh():
    c = 0.15
    prof = solve_generalized_kink(Nonlinearity.cubic(), c, -math.sqrt(c))
    x = np.linspace(-30, 30, 301)
    assert np.max(np.abs(prof(x) - eval_kink(c, 0.0, x))) < 1e-7


def test_quadrature_kink_rejects_bad_level():
    with pytest.raises(HypothesisError):
        solve_generalized_kink(Nonlinearity.cubic(), 0.15, -0.1)


def test_ground_state_matches_sech_family():
    fam = PowerFamily(3)
    gs = solve_ground_state(Nonlinearity.pure_power(3), 0.4)
    x = np.linspace(-20, 20, 201)
    assert np.max(np.abs(gs(x) - fam.value(0.4, x))) < 1e-9


def test_weinstein_value_positive_in_range():
    rep = weinstein_check(0.1, 1.0)
    assert rep["positive"]
    assert rep["value"] == pytest.approx(9 * math.sqrt(0.1) / (2 - 0.9))


def test_config_validation():
    with pytest.raises(ValueError):
        MultiKinkConfig("odd", 1.0, (0.12, 0.05), (60.0, 30.0, 0.0))
    with pytest.raises(ValueError):
        MultiKinkConfig("odd", 1.0, (0.05, 0.12), (60.0, 30.0))
    with pytest.raises(ValueError):
        MultiKinkConfig("sideways", 1.0, (0.05,), (0.0,))


def test_odd_profile_limits_and_kink_energy():
    config = MultiKinkConfig("odd", 1.0, (0.05,), (30.0, 0.0))
    grid = Grid(2048, 400.0, x0=-260.0)
    u = build_multikink_profile(config, grid, 0.0)
    c = config.kink_scaling
    assert u.values[-1] == pytest.approx(math.sqrt(c), abs=1e-6)
    assert u.values[0] == pytest.approx(-math.sqrt(c), abs=1e-3)
    assert kink_energy(c) == pytest.approx(2 * math.sqrt(2) / 3 * c**1.5)


def test_close_components_warn():
    config = MultiKinkConfig("odd", 1.0, (0.05,), (5.0, 0.0), separation=30.0)
    grid = Grid(1024, 200.0, x0=-100.0)
    with pytest.warns(UserWarning):
        build_multikink_profile(config, grid, 0.0)
