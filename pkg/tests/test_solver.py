import numpy as np
import pytest

from kinklab.grid import ConstantBackground, Field, Grid, h1_distance
from kinklab.nonlinearity import Nonlinearity
from kinklab.profiles import eval_gardner_soliton
from kinklab.solver import BlowUpError, EvolutionSpec, evolve, temporal_order

BETA = 1.0
GARDNER = Nonlinearity.gardner(BETA)


def _soliton_field(grid, c, t=0.0):
    return Field(grid, eval_gardner_soliton(c, BETA, -c * t, grid.x),
                 ConstantBackground(0.0), t)


def test_spec_validation():
    grid = Grid(512, 100.0, x0=-50.0)
    with pytest.raises(ValueError):
        EvolutionSpec(GARDNER, grid, 0.3, 1.0)   # horizon not on step lattice
    with pytest.raises(ValueError):
        EvolutionSpec(GARDNER, grid, 5.0, 10.0)  # beyond stability bound
    with pytest.raises(ValueError):
        EvolutionSpec(GARDNER, grid, 1e-3, 1.0, mode="kink_perturbation")


def test_soliton_translation_short_horizon():
    grid = Grid(1024, 100.0, x0=-50.0)
    c = 0.2
    spec = EvolutionSpec(GARDNER, grid, 1e-3, 2.0)
    final = evolve(_soliton_field(grid, c), spec)[-1]
    exact = _soliton_field(grid, c, 2.0)
    assert h1_distance(final, exact) < 1e-7


def test_reversibility():
    grid = Grid(1024, 100.0, x0=-50.0)
    u0 = _soliton_field(grid, 0.15)
    fwd = evolve(u0, EvolutionSpec(GARDNER, grid, 1e-3, 1.0))[-1]
    back = evolve(fwd, EvolutionSpec(GARDNER, grid, -1e-3, -1.0))[-1]
    assert np.max(np.abs(back.values - u0.values)) < 1e-9


def test_output_times_must_sit_on_lattice():
    grid = Grid(512, 100.0, x0=-50.0)
    u0 = _soliton_field(grid, 0.15)
    spec = EvolutionSpec(GARDNER, grid, 1e-2, 1.0)
    with pytest.raises(ValueError):
        evolve(u0, spec, output_times=[0.005])


def test_observers_see_snapshots():
    grid = Grid(512, 100.0, x0=-50.0)
    u0 = _soliton_field(grid, 0.15)
    spec = EvolutionSpec(GARDNER, grid, 1e-2, 0.1)
    seen = []
    evolve(u0, spec, observers=(lambda t, f: seen.append(t),),
           output_times=[0.0, 0.05, 0.1])
    assert seen == [0.0, 0.05, 0.1]


def test_blowup_detection():
    grid = Grid(512, 50.0, x0=-25.0)
    # large focusing quartic datum goes supercritical fast on this box
    vals = 8.0 * np.exp(-grid.x**2)
    u0 = Field(grid, vals, ConstantBackground(0.0), 0.0)
    spec = EvolutionSpec(Nonlinearity.pure_power(4), grid, 2e-4, 2.0,
                         blowup_factor=5.0)
    with pytest.raises(BlowUpError):
        evolve(u0, spec)


def test_temporal_order_helper():
    dts = [0.1, 0.05, 0.025]
    errors = [8e-5, 5e-6, 3.125e-7]
    assert temporal_order(dts, errors) == pytest.approx(4.0, rel=0.01)
