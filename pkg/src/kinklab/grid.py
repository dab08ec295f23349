"""Periodic grids, spectral calculus and fields with non-decaying backgrounds.

A Field stores full samples of a function on a periodic grid together with a
background descriptor (constant value, or a reference kink).  Spectral
operations and norms act on the decaying part ``values - background``; the
background's derivatives are added back analytically.  This is what makes
kink-carrying solutions (which have a net jump and cannot be periodized)
representable on a periodic box.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [x0, x0 + length)."""

    n: int
    length: float
    x0: float = 0.0

    def __post_init__(self):
        if self.n <= 0 or self.n & (self.n - 1):
            raise ValueError(f"grid resolution must be a power of two, got {self.n}")
        if self.length <= 0:
            raise ValueError("grid length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Wavenumbers for the full complex FFT layout."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def integrate(self, values: np.ndarray) -> float:
        # Rectangle rule: spectrally accurate for smooth periodic/decaying data.
        return float(np.sum(values) * self.dx)


def spectral_derivative(values: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    vhat = np.fft.fft(values)
    k = grid.k
    if order % 2 == 1 and grid.n % 2 == 0:
        # zero the (derivative of the) unmatched Nyquist mode for odd derivatives
        k = k.copy()
        k[grid.n // 2] = 0.0
    return np.real(np.fft.ifft((1j * k) ** order * vhat))


def spectral_shift(values: np.ndarray, grid: Grid, delta: float) -> np.ndarray:
    """Return samples of x -> values(x - delta), exact on the periodic grid."""
    vhat = np.fft.fft(values)
    return np.real(np.fft.ifft(vhat * np.exp(-1j * grid.k * delta)))


# --- backgrounds -----------------------------------------------------------


@dataclass(frozen=True)
class ConstantBackground:
    value: float = 0.0

    def eval(self, x: np.ndarray) -> np.ndarray:
        return np.full_like(x, self.value, dtype=float)

    def deriv(self, x: np.ndarray, order: int = 1) -> np.ndarray:
        return np.zeros_like(x, dtype=float)

    @property
    def limits(self) -> tuple[float, float]:
        return (self.value, self.value)


@dataclass(frozen=True)
class KinkBackground:
    """Reference kink sqrt(c) tanh(sqrt(c)(x - center)/sqrt(2))."""

    c: float
    center: float = 0.0

    def _arg(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt(self.c / 2.0) * (x - self.center)

    def eval(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt(self.c) * np.tanh(self._arg(x))

    def deriv(self, x: np.ndarray, order: int = 1) -> np.ndarray:
        a = np.sqrt(self.c / 2.0)
        s = self._arg(x)
        sech2 = 1.0 / np.cosh(s) ** 2
        if order == 1:
            return np.sqrt(self.c) * a * sech2
        if order == 2:
            return -2.0 * np.sqrt(self.c) * a**2 * sech2 * np.tanh(s)
        if order == 3:
            return np.sqrt(self.c) * a**3 * sech2 * (4.0 * np.tanh(s) ** 2 - 2.0 * sech2)
        raise ValueError(f"unsupported derivative order {order}")

    @property
    def limits(self) -> tuple[float, float]:
        r = np.sqrt(self.c)
        return (-r, r)


Background = ConstantBackground | KinkBackground


@dataclass
class Field:
    """Real function sampled on a periodic grid, plus background and time tag."""

    grid: Grid
    values: np.ndarray
    background: Background = field(default_factory=ConstantBackground)
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError("field samples do not match grid resolution")

    def decaying(self) -> np.ndarray:
        return self.values - self.background.eval(self.grid.x)

    def deriv(self, order: int = 1) -> np.ndarray:
        return self.background.deriv(self.grid.x, order) + spectral_derivative(
            self.decaying(), self.grid, order
        )

    def l2(self) -> float:
        return float(np.sqrt(self.grid.integrate(self.decaying() ** 2)))

    def h1(self) -> float:
        w = self.decaying()
        wx = spectral_derivative(w, self.grid, 1)
        return float(np.sqrt(self.grid.integrate(w**2 + wx**2)))

    def shifted(self, delta: float) -> "Field":
        """Translate the field: result(x) = self(x - delta)."""
        if isinstance(self.background, ConstantBackground):
            bg = self.background
        else:
            bg = replace(self.background, center=self.background.center + delta)
        return Field(self.grid, spectral_shift(self.decaying(), self.grid, delta)
                     + bg.eval(self.grid.x), bg, self.t)


def l2_distance(a: Field, b: Field) -> float:
    if a.grid != b.grid:
        raise ValueError("mismatched grids")
    d = a.values - b.values
    return float(np.sqrt(a.grid.integrate(d**2)))


def h1_distance(a: Field, b: Field) -> float:
    if a.grid != b.grid:
        raise ValueError("mismatched grids")
    d = a.values - b.values
    dx = a.deriv(1) - b.deriv(1)
    return float(np.sqrt(a.grid.integrate(d**2 + dx**2)))
