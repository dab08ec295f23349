"""Acceptance gate: one test per headline property, one verdict line each.

These runs take a few minutes in total; every test prints a single
PASS/FAIL line with the measured numbers so the suite output doubles as a
results table.
"""

import numpy as np
import pytest

from kinklab import scenarios
from kinklab.grid import Grid, h1_distance
from kinklab.nonlinearity import Nonlinearity
from kinklab.solver import EvolutionSpec, evolve, temporal_order


def _verdict(label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _all(checks):
    return all(c["passed"] for c in checks)


def _detail(checks):
    return "; ".join(f"{c['name']}={c['value']:.3g}" for c in checks)


def test_soliton_identity_suite():
    res = scenarios.run_identities()
    worst = max(r["max_residual"] for r in res["reports"])
    _verdict("identities", _all(res["checks"]),
             f"worst residual {worst:.3g}, {res['elapsed']:.2f} s")


def test_transform_commutation():
    res = scenarios.run_transform_checks()
    _verdict("transform commutation", _all(res["checks"]),
             f"worst L2 gap {max(res['gaps'].values()):.3g}, "
             f"two-kink {res['two_kink_pointwise']:.3g}")


def test_solver_validation():
    beta, c = 1.0, 0.2
    length, horizon = 100.0, 10.0
    grid = Grid(2048, length, x0=-length / 2.0)
    gardner = Nonlinearity.gardner(beta)

    from kinklab.diagnostics import gardner_energy, gardner_mass
    from kinklab.profiles import eval_gardner_soliton
    from kinklab.grid import ConstantBackground, Field

    def soliton(g, t):
        return Field(g, eval_gardner_soliton(c, beta, -c * t, g.x),
                     ConstantBackground(0.0), t)

    final = evolve(soliton(grid, 0.0),
                   EvolutionSpec(gardner, grid, 1e-3, horizon))[-1]
    err = h1_distance(final, soliton(grid, horizon))

    m0, e0 = gardner_mass(soliton(grid, 0.0)), gardner_energy(soliton(grid, 0.0), beta)
    m1, e1 = gardner_mass(final), gardner_energy(final, beta)
    drift = max(abs(m1 - m0) / abs(m0), abs(e1 - e0) / abs(e0))

    # temporal order by self-convergence against a fine-step reference, with
    # steps kept large enough that errors sit above the roundoff floor near
    # 1e-10 (the closed-form comparison saturates there and flattens out)
    g2 = Grid(1024, length, x0=-length / 2.0)
    ref = evolve(soliton(g2, 0.0), EvolutionSpec(gardner, g2, 2.5e-3, 2.0))[-1]
    dts = [0.25, 0.2, 0.125, 0.1]
    errs = [h1_distance(
        evolve(soliton(g2, 0.0), EvolutionSpec(gardner, g2, dt, 2.0))[-1], ref)
        for dt in dts]
    order = temporal_order(dts, errs)

    ok = err < 1e-6 and drift < 1e-8 and order >= 3.8
    _verdict("solver validation", ok,
             f"H1 error {err:.3g}, drift {drift:.3g}, order {order:.2f}")


def test_even_stability_sweep():
    res = scenarios.run_even_stability()
    _verdict("even stability", _all(res["checks"]),
             f"A0 ratio {res['summary']['ratio']:.3f}, "
             f"A0 {[round(v, 3) for v in res['summary']['A0'].values()]}")


def test_odd_stability_sweep():
    res = scenarios.run_odd_stability()
    _verdict("odd stability", _all(res["checks"]),
             f"A0 ratio {res['summary']['ratio']:.3f}, "
             f"worst mass drop {res['worst_drop']:.3g} vs bound "
             f"{res['drop_bound']:.3g}")


def test_modulation_and_expansion():
    res = scenarios.run_expansion()
    _verdict("modulation/expansion", _all(res["checks"]),
             f"ortho {res['ortho_worst']:.3g}, alpha exponent "
             f"{res['alpha_exponent']:.2f}, decay rates "
             f"{res['decay_rates']['pointwise']:.3f}/"
             f"{res['decay_rates']['energy']:.3f} vs 0.8*sigma0 "
             f"{0.8 * res['sigma0']:.3f}")


def test_coercivity_suite():
    res = scenarios.run_coercivity()
    _verdict("coercivity", _all(res["checks"]),
             f"kink form {res['kink']:.4f}, kernel "
             f"{res['kink_form_unconstrained']:.2e}, localized "
             f"{ {k: round(v, 4) for k, v in res['localized'].items()} }, "
             f"multikink form {res['multikink']:.4f}")


def test_collision_dichotomy():
    res = scenarios.run_collision()
    q = res["results"]["quartic"]["defect"]
    g = res["results"]["gardner"]["defect"]
    _verdict("collision dichotomy", _all(res["checks"]),
             f"quartic defect {q:.3g} vs floor {res['noise_floor']:.3g} "
             f"(x{q / res['noise_floor']:.0f}), integrable x{g / res['noise_floor']:.1f}")
