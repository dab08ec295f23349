"""Polynomial nonlinearities and the focusing counterpart construction.

The defocusing family is u_t + (u_xx - f(u))_x = 0 with f a polynomial of
degree at most five.  Expanding f around a background level b0 with the right
amplitude factor b1 turns the equation for the perturbation into a *focusing*
gKdV equation whose leading nonlinearity is a pure power s^k0 with unit
coefficient; `derived_nonlinearity` performs that construction exactly in
coefficient arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFOCUSING = -1
FOCUSING = +1

_MAX_DEGREE = 5


@dataclass(frozen=True)
class Nonlinearity:
    """f(u) = sum_k coeffs[k] u^k, degree <= 5, with a sign convention.

    sign=FOCUSING means the equation u_t + (u_xx + f(u))_x = 0;
    sign=DEFOCUSING means u_t + (u_xx - f(u))_x = 0.
    """

    coeffs: tuple[float, ...]
    sign: int = DEFOCUSING

    def __post_init__(self):
        c = tuple(float(a) for a in self.coeffs)
        if len(c) > _MAX_DEGREE + 1:
            raise ValueError(f"degree above {_MAX_DEGREE} not supported")
        if self.sign not in (FOCUSING, DEFOCUSING):
            raise ValueError("sign must be FOCUSING (+1) or DEFOCUSING (-1)")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        d = 0
        for k, a in enumerate(self.coeffs):
            if a != 0.0:
                d = k
        return d

    def __call__(self, u: np.ndarray | float) -> np.ndarray | float:
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def derivative(self, order: int = 1) -> "Nonlinearity":
        c = np.polynomial.polynomial.polyder(np.array(self.coeffs), m=order)
        return Nonlinearity(tuple(c) if c.size else (0.0,), self.sign)

    def deriv_at(self, u: float, order: int) -> float:
        if order > _MAX_DEGREE:
            return 0.0
        return float(self.derivative(order)(u))

    def antiderivative_at(self, u: np.ndarray | float) -> np.ndarray | float:
        """Integral of f from 0 to u."""
        c = np.polynomial.polynomial.polyint(np.array(self.coeffs))
        return np.polynomial.polynomial.polyval(u, c)

    # common instances
    @staticmethod
    def cubic(sign: int = DEFOCUSING) -> "Nonlinearity":
        return Nonlinearity((0.0, 0.0, 0.0, 1.0), sign)

    @staticmethod
    def kdv_quadratic() -> "Nonlinearity":
        return Nonlinearity((0.0, 0.0, 1.0), FOCUSING)

    @staticmethod
    def gardner(beta: float) -> "Nonlinearity":
        return Nonlinearity((0.0, 0.0, 1.0, -beta), FOCUSING)

    @staticmethod
    def pure_power(p: int, sign: int = FOCUSING) -> "Nonlinearity":
        c = [0.0] * (p + 1)
        c[p] = 1.0
        return Nonlinearity(tuple(c), sign)

    @staticmethod
    def quartic_defocusing(b0: float) -> "Nonlinearity":
        """f(s) = s^4 - 4 b0 s^3 + 6 b0^2 s^2, the inelastic-collision source."""
        return Nonlinearity((0.0, 0.0, 6.0 * b0**2, -4.0 * b0, 1.0), DEFOCUSING)

    @staticmethod
    def cubic_quintic(mu: float, sign: int = DEFOCUSING) -> "Nonlinearity":
        return Nonlinearity((0.0, 0.0, 0.0, 1.0, 0.0, mu), sign)


class HypothesisError(ValueError):
    """A structural hypothesis on (f, b0) fails."""


@dataclass(frozen=True)
class DerivedNonlinearity:
    """Focusing counterpart data for a defocusing f expanded around b0."""

    source: Nonlinearity
    b0: float
    k0: int
    b1: float
    f_tilde: Nonlinearity
    shift_speed: float  # f'(b0); frame drift of the background map

    def map_to_source(self, s: np.ndarray | float) -> np.ndarray | float:
        """u-level corresponding to perturbation amplitude s: b0 + b1 s."""
        return self.b0 + self.b1 * s


def derived_nonlinearity(f: Nonlinearity, b0: float, *, other_branch: bool = False,
                         tol: float = 1e-12) -> DerivedNonlinearity:
    """Construct the focusing counterpart of f around background level b0.

    k0 is the first order in {2,3,4} with f^(k0)(b0) != 0; the amplitude
    factor solves b1^(k0-1) = -k0!/f^(k0)(b0) so that the leading coefficient
    of the derived nonlinearity is exactly +1.  For k0=3 a real b1 requires
    f'''(b0) < 0.  `other_branch` selects the mirror amplitude factor -b1
    (admissible for k0=2 and k0=3; k0=4 has a single real root).  For k0=2
    the mirror branch carries leading coefficient -1, which is the focusing
    quadratic equation read through the reflection s -> -s.
    """
    scale = max(abs(a) for a in f.coeffs) or 1.0
    derivs = {k: f.deriv_at(b0, k) for k in (2, 3, 4)}
    k0 = None
    for k in (2, 3, 4):
        if abs(derivs[k]) > tol * scale:
            k0 = k
            break
    if k0 is None:
        raise HypothesisError(
            "all derivatives of order 2..4 vanish at b0; no focusing counterpart")
    fk = derivs[k0]
    if k0 == 2:
        # principal root: leading quadratic coefficient +1; the mirror root
        # gives -1, equivalent to the focusing form under s -> -s
        b1 = -2.0 / fk
        if other_branch:
            b1 = -b1
    elif k0 == 3:
        if fk > 0:
            raise HypothesisError(
                f"k0=3 requires f'''(b0) < 0, got {fk:g}")
        b1 = math.sqrt(-6.0 / fk)
        if other_branch:
            b1 = -b1
    else:  # k0 == 4
        b1 = math.copysign(abs(24.0 / fk) ** (1.0 / 3.0), -fk)
        if other_branch:
            raise HypothesisError("k0=4 has a unique real amplitude factor")

    # f~(s) = -(1/b1)[f(b0 + b1 s) - f(b0) - b1 f'(b0) s]; Taylor coefficients
    # are exact for a polynomial f.
    coeffs = [0.0, 0.0]
    for k in range(2, f.degree + 1):
        coeffs.append(-f.deriv_at(b0, k) * b1 ** (k - 1) / math.factorial(k))
    ft = Nonlinearity(tuple(coeffs), FOCUSING)
    return DerivedNonlinearity(f, b0, k0, b1, ft, f.deriv_at(b0, 1))
