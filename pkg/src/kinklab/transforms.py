"""Solution-space maps between the defocusing equations and their focusing
counterparts.

All maps act on `Field`s and are pure.  Spatial derivatives are spectral on
the decaying part with analytic background derivatives added back; frame
shifts are applied with the exact spectral translation.  `pde_residual`
checks any trajectory against its claimed equation and is the workhorse for
validating the commutation diagrams.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import ConstantBackground, Field, KinkBackground, spectral_shift
from .nonlinearity import DerivedNonlinearity, Nonlinearity, derived_nonlinearity  # noqa: F401
from .profiles import SQRT2, eval_kink

_BG_TOL = 1e-9


def _require_constant_background(v: Field, who: str) -> float:
    if not isinstance(v.background, ConstantBackground):
        raise ValueError(f"{who} expects a field on a constant background")
    return v.background.value


def miura(v: Field, c: float) -> Field:
    """(3/2)c + [(3/sqrt(2)) v_x - (3/2) v^2] evaluated at x - 3ct.

    Sends kink-type solutions of the defocusing cubic equation to candidate
    solutions of KdV; the image decays to 0 at both infinities when v^2 -> c.
    """
    if c <= 0:
        raise ValueError("scaling must be positive")
    inner = 3.0 / SQRT2 * v.deriv(1) - 1.5 * v.values**2
    # inner -> -(3/2)c at both ends when v -> +-sqrt(c); shift its decaying part
    decaying = inner + 1.5 * c
    out = spectral_shift(decaying, v.grid, 3.0 * c * v.t)
    return Field(v.grid, out, ConstantBackground(0.0), v.t)


def gardner_transform(v: Field, beta: float) -> Field:
    """v - (3/2)sqrt(2 beta) v_x - (3/2) beta v^2, no frame shift."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    a = _require_constant_background(v, "gardner_transform")
    out = v.values - 1.5 * math.sqrt(2.0 * beta) * v.deriv(1) - 1.5 * beta * v.values**2
    return Field(v.grid, out, ConstantBackground(a - 1.5 * beta * a**2), v.t)


def even_background_map(field: Field, beta: float, direction: str,
                        branch: int = +1) -> Field:
    """Exact change of variables u(t,x) = b - sqrt(beta) v(t, x + t/(3 beta)).

    direction 'to_mkdv' maps a Gardner field v to the mKdV field u on the
    constant background b = 1/(3 sqrt(beta)); 'to_gardner' inverts it.
    branch=-1 selects the mirrored branch u = -b + sqrt(beta) v.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    b = branch / (3.0 * math.sqrt(beta))
    sb = math.sqrt(beta)
    delta = field.t / (3.0 * beta)
    if direction == "to_mkdv":
        a = _require_constant_background(field, "even_background_map")
        shifted = spectral_shift(field.decaying(), field.grid, -delta)
        values = b - branch * sb * (shifted + a)
        return Field(field.grid, values, ConstantBackground(b - branch * sb * a), field.t)
    if direction == "to_gardner":
        a = _require_constant_background(field, "even_background_map")
        v_level = branch * (b - a) / sb
        shifted = spectral_shift(field.decaying(), field.grid, delta)
        values = branch * (b - (shifted + a)) / sb
        return Field(field.grid, values, ConstantBackground(v_level), field.t)
    raise ValueError("direction must be 'to_mkdv' or 'to_gardner'")


def odd_decompose(u: Field, beta: float, kink_center: float | None = None) -> Field:
    """Perturbation of the reference kink in the drifting frame.

    u(t,x) = phi_c(x - center) + sqrt(beta) u~(t, x + 3ct) with c = 1/(9 beta);
    returns u~ on the constant-zero background.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = 1.0 / (9.0 * beta)
    if not isinstance(u.background, KinkBackground):
        raise ValueError("odd_decompose expects a kink-background field")
    if abs(u.background.c - c) > _BG_TOL * max(1.0, c):
        raise ValueError(
            f"background mismatch: kink scaling {u.background.c:.6g} "
            f"inconsistent with 1/(9 beta) = {c:.6g}")
    if kink_center is not None and abs(kink_center - u.background.center) > _BG_TOL:
        raise ValueError("background mismatch: kink center disagrees with field")
    w = u.decaying() / math.sqrt(beta)
    out = spectral_shift(w, u.grid, 3.0 * c * u.t)
    return Field(u.grid, out, ConstantBackground(0.0), u.t)


def odd_compose(ut: Field, beta: float, kink_center: float) -> Field:
    """Inverse of odd_decompose for the kink centered at kink_center."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = 1.0 / (9.0 * beta)
    _require_constant_background(ut, "odd_compose")
    bg = KinkBackground(c, kink_center)
    w = spectral_shift(ut.values, ut.grid, -3.0 * c * ut.t) * math.sqrt(beta)
    return Field(ut.grid, bg.eval(ut.grid.x) + w, bg, ut.t)


def kdv_map_odd(ut: Field, beta: float, kink_shift: float = 0.0) -> Field:
    """KdV candidate built from the kink perturbation.

    Q_2c(s) - 3 sqrt(beta) phi_c(s) u~ + (3/2) sqrt(2 beta) u~_x
    - (3/2) beta u~^2, with s = x - 2ct + kink_shift and c = 1/(9 beta).
    Composed with odd_decompose this reproduces the Miura image exactly.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = 1.0 / (9.0 * beta)
    _require_constant_background(ut, "kdv_map_odd")
    s = ut.grid.x - 2.0 * c * ut.t + kink_shift
    q2c = 3.0 * c / np.cosh(np.sqrt(c) * s / SQRT2) ** 2
    phi = eval_kink(c, 0.0, s)
    sb = math.sqrt(beta)
    out = (q2c - 3.0 * sb * phi * ut.values
           + 1.5 * math.sqrt(2.0 * beta) * ut.deriv(1) - 1.5 * beta * ut.values**2)
    return Field(ut.grid, out, ConstantBackground(0.0), ut.t)


def derived_background_map(field: Field, dn: DerivedNonlinearity,
                           direction: str) -> Field:
    """Background map u = b0 + b1 s(t, x + f'(b0) t) for a general defocusing f.

    Generalizes even_background_map; 'to_defocusing' maps the focusing
    perturbation s to the defocusing field u, 'to_focusing' inverts.
    """
    delta = dn.shift_speed * field.t
    a = _require_constant_background(field, "derived_background_map")
    if direction == "to_defocusing":
        shifted = spectral_shift(field.decaying(), field.grid, -delta)
        values = dn.b0 + dn.b1 * (shifted + a)
        return Field(field.grid, values, ConstantBackground(dn.b0 + dn.b1 * a), field.t)
    if direction == "to_focusing":
        s_level = (a - dn.b0) / dn.b1
        shifted = spectral_shift(field.decaying(), field.grid, delta)
        values = (shifted + a - dn.b0) / dn.b1
        return Field(field.grid, values, ConstantBackground(s_level), field.t)
    raise ValueError("direction must be 'to_defocusing' or 'to_focusing'")


def pde_residual(trajectory, equation: Nonlinearity, times=None):
    """L2 residual of u_t + (u_xx + sign f(u))_x at interior trajectory times.

    The time derivative is a centered difference over neighbouring snapshots;
    spatial derivatives are spectral with analytic background parts.  Returns
    (times, residual norms), one entry per interior snapshot.
    """
    fields = list(trajectory)
    if len(fields) < 3:
        raise ValueError("need at least 3 time samples")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ValueError("mismatched grids in trajectory")
    if times is None:
        times = [f.t for f in fields]
    fprime = equation.derivative(1)
    out_t, out_r = [], []
    for i in range(1, len(fields) - 1):
        dt = times[i + 1] - times[i - 1]
        if dt <= 0:
            raise ValueError("trajectory times must be increasing")
        u_t = (fields[i + 1].values - fields[i - 1].values) / dt
        fld = fields[i]
        flux_x = fld.deriv(3) + equation.sign * fprime(fld.values) * fld.deriv(1)
        res = u_t + flux_x
        out_t.append(times[i])
        out_r.append(float(np.sqrt(grid.integrate(res**2))))
    return out_t, out_r
