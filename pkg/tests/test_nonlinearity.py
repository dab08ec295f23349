import math

import numpy as np
import pytest

from kinklab.nonlinearity import (HypothesisError, Nonlinearity,
                                  derived_nonlinearity)


def test_polynomial_eval_and_derivatives():
    f = Nonlinearity.cubic_quintic(0.25)
    u = 0.7
    assert f(u) == pytest.approx(u**3 + 0.25 * u**5)
    assert f.deriv_at(u, 1) == pytest.approx(3 * u**2 + 1.25 * u**4)
    assert f.deriv_at(u, 2) == pytest.approx(6 * u + 5 * u**3)


def test_cubic_background_expansion_is_gardner():
    beta = 0.7
    b0 = 1.0 / (3.0 * math.sqrt(beta))
    dn = derived_nonlinearity(Nonlinearity.cubic(), b0)
    assert dn.k0 == 2
    coeffs = dn.f_tilde.coeffs
    assert coeffs[2] == pytest.approx(1.0, abs=1e-14)
    assert coeffs[3] == pytest.approx(-beta, abs=1e-14)


def test_mirror_branch_flips_leading_sign():
    b0 = 0.5
    dn = derived_nonlinearity(Nonlinearity.cubic(), b0, other_branch=True)
    assert dn.f_tilde.coeffs[2] == pytest.approx(-1.0, abs=1e-14)


def test_background_expansion_is_exact_taylor_rearrangement():
    # f(b0 + b1 s) = f(b0) + f'(b0) b1 s - b1 f~(s) must hold identically
    f = Nonlinearity.cubic_quintic(0.1)
    b0 = 0.4
    dn = derived_nonlinearity(f, b0)
    s = np.linspace(-1.5, 1.5, 31)
    lhs = f(dn.map_to_source(s))
    rhs = f(b0) + f.deriv_at(b0, 1) * dn.b1 * s - dn.b1 * dn.f_tilde(s)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_quartic_touchpoint_gives_pure_power():
    b0 = 0.8
    f = Nonlinearity.quartic_defocusing(b0)
    dn = derived_nonlinearity(f, b0)
    assert dn.k0 == 4
    coeffs = dn.f_tilde.coeffs
    assert coeffs[4] == pytest.approx(1.0, abs=1e-12)
    assert all(abs(c) < 1e-12 for c in coeffs[:4])


def test_degenerate_point_rejected():
    # the linear map u -> u has no nonlinear term to expand at all
    with pytest.raises(HypothesisError):
        derived_nonlinearity(Nonlinearity((0.0, 1.0), sign=-1), 0.3)
