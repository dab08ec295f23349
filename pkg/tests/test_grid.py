import numpy as np
import pytest

from kinklab.grid import (ConstantBackground, Field, Grid, KinkBackground,
                          h1_distance, spectral_derivative, spectral_shift)


def test_grid_requires_power_of_two():
    with pytest.raises(ValueError):
        Grid(1000, 50.0, 0.0)


def test_spectral_derivative_on_trig():
    grid = Grid(256, 2 * np.pi, x0=0.0)
    u = np.sin(3 * grid.x)
    du = spectral_derivative(u, grid, 1)
    assert np.max(np.abs(du - 3 * np.cos(3 * grid.x))) < 1e-11
    d3 = spectral_derivative(u, grid, 3)
    assert np.max(np.abs(d3 + 27 * np.cos(3 * grid.x))) < 5e-9


def test_spectral_shift_translates():
    grid = Grid(512, 80.0, x0=-40.0)
    u = np.exp(-grid.x**2)
    shifted = spectral_shift(u, grid, 2.5)
    assert np.max(np.abs(shifted - np.exp(-(grid.x - 2.5) ** 2))) < 1e-10


def test_kink_background_derivatives_match_fd():
    bg = KinkBackground(0.15, center=1.0)
    x = np.linspace(-20, 20, 41)
    h = 1e-5
    fd = (bg.eval(x + h) - bg.eval(x - h)) / (2 * h)
    assert np.max(np.abs(bg.deriv(x, 1) - fd)) < 1e-8
    lo, hi = bg.limits
    assert lo == pytest.approx(-np.sqrt(0.15))
    assert hi == pytest.approx(np.sqrt(0.15))


def test_field_h1_of_gaussian():
    grid = Grid(1024, 100.0, x0=-50.0)
    u = np.exp(-grid.x**2 / 2)
    f = Field(grid, u, ConstantBackground(0.0), 0.0)
    # int e^{-x^2} = sqrt(pi), int x^2 e^{-x^2} = sqrt(pi)/2
    assert f.h1() == pytest.approx(np.sqrt(1.5 * np.sqrt(np.pi)), rel=1e-10)


def test_h1_distance_rejects_grid_mismatch():
    a = Field(Grid(256, 50.0, x0=-25.0), np.zeros(256), ConstantBackground(0.0), 0.0)
    b = Field(Grid(512, 50.0, x0=-25.0), np.zeros(512), ConstantBackground(0.0), 0.0)
    with pytest.raises(ValueError):
        h1_distance(a, b)


def test_field_shift_moves_kink_background():
    grid = Grid(1024, 200.0, x0=-100.0)
    bg = KinkBackground(0.1, center=0.0)
    f = Field(grid, bg.eval(grid.x), bg, 0.0)
    g = f.shifted(4.0)
    assert g.background.center == pytest.approx(4.0)
    assert np.max(np.abs(g.values - KinkBackground(0.1, 4.0).eval(grid.x))) < 1e-9
