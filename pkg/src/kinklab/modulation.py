"""Decomposition of fields into kink + solitons + residual, and the
discretized quadratic forms controlling the residual.

The modulation fit imposes the orthogonality conditions
int z phi'_c = 0 and int z Q'_{c_j} = int z Q_{c_j} = 0 by a Newton solve in
the 2N-1 parameters (x_1..x_N, c_1..c_{N-1}); the kink scaling is never
modulated.  Coercivity of the second-order energy functionals is estimated
by dense generalized eigenvalue solves restricted to the orthogonal
complement of the constraint span, normalized by the H1 Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .diagnostics import WeightFamily
from .grid import ConstantBackground, Field, Grid, KinkBackground, spectral_derivative
from .profiles import (GardnerFamily, MultiKinkConfig, build_multikink_profile,
                       eval_kink, eval_kink_deriv)


class OutOfTubeError(RuntimeError):
    """Newton failed to converge: the field is outside the modulation tube."""


@dataclass(frozen=True)
class ModulationState:
    """Fitted decomposition parameters and the residual they leave behind."""

    shifts: tuple[float, ...]      # x_1..x_N (kink last for odd parity)
    scalings: tuple[float, ...]    # c_1..c_{N-1} solitons (fitted or frozen)
    residual: Field                # z on the field's grid
    iterations: int
    ortho_residuals: tuple[float, ...]

    @property
    def residual_h1(self) -> float:
        return self.residual.h1()


def _soliton_args(config: MultiKinkConfig, shifts, scalings, t, x):
    c = config.kink_scaling
    return [x + (3.0 * c - cj) * t + xj for cj, xj in zip(scalings, shifts)]


def fit_modulation(u: Field, config: MultiKinkConfig,
                   guess_shifts=None, guess_scalings=None, *,
                   fit_scalings: bool = True, tol: float = 1e-12,
                   max_iter: int = 50) -> ModulationState:
    """Newton solve of the orthogonality system around the multi-kink profile.

    Works for odd configurations (kink + solitons; the kink shift is the last
    parameter, its scaling is frozen) and even ones (solitons on the constant
    background).  The Jacobian is assembled from the closed-form soliton
    derivatives.  Raises OutOfTubeError after max_iter iterations.
    """
    grid = u.grid
    x = grid.x
    t = u.t
    dx = grid.dx
    fam = GardnerFamily(config.beta)
    sb = math.sqrt(config.beta)
    odd = config.parity == "odd"
    soliton_sign = sb if odd else -sb
    m = len(config.scalings)
    ck = config.kink_scaling

    shifts = list(guess_shifts if guess_shifts is not None else config.shifts)
    scalings = list(guess_scalings if guess_scalings is not None
                    else config.scalings)
    n_params = m + (m if fit_scalings else 0) + (1 if odd else 0)

    last_res = None
    for it in range(1, max_iter + 1):
        cfg = replace(config, shifts=tuple(shifts), scalings=tuple(scalings))
        prof = build_multikink_profile(cfg, grid, t)
        z = u.values - prof.values

        args = _soliton_args(config, shifts[:m], scalings, t, x)
        q = [fam.value(cj, a) for cj, a in zip(scalings, args)]
        qs = [fam.ds(cj, a) for cj, a in zip(scalings, args)]
        qss = [fam.dss(cj, a) for cj, a in zip(scalings, args)]
        if odd:
            kp = eval_kink_deriv(ck, shifts[-1] + ck * t, x)

        # residual vector: [int z Q'_j, int z Q_j]_j then int z phi'; the
        # scaling conditions int z Q_j are only imposed when c_j is a free
        # parameter, otherwise the system would be overdetermined
        res = []
        for j in range(m):
            res.append(dx * float(np.sum(z * qs[j])))
            if fit_scalings:
                res.append(dx * float(np.sum(z * q[j])))
        if odd:
            res.append(dx * float(np.sum(z * kp)))
        res = np.array(res)
        last_res = res
        if np.max(np.abs(res)) < tol:
            zf = Field(grid, z, ConstantBackground(0.0), t)
            return ModulationState(tuple(shifts), tuple(scalings), zf, it,
                                   tuple(np.abs(res)))

        # parameter derivatives of z
        dz = []
        for j in range(m):
            dz.append(-soliton_sign * qs[j])                      # d/dx_j
        if fit_scalings:
            for j in range(m):
                dc = fam.dc(scalings[j], args[j])
                dz.append(-soliton_sign * (dc - t * qs[j]))       # d/dc_j
        if odd:
            dz.append(-kp)                                        # d/dx_N

        # derivatives of the weight functions themselves
        jac = np.zeros((len(res), n_params))
        row = 0
        for j in range(m):
            dcs = fam.dcs(scalings[j], args[j]) if fit_scalings else None
            for col in range(n_params):
                jac[row, col] = dx * float(np.sum(dz[col] * qs[j]))
                if fit_scalings:
                    jac[row + 1, col] = dx * float(np.sum(dz[col] * q[j]))
            jac[row, j] += dx * float(np.sum(z * qss[j]))
            if fit_scalings:
                dc = fam.dc(scalings[j], args[j])
                jac[row + 1, j] += dx * float(np.sum(z * qs[j]))
                jac[row, m + j] += dx * float(np.sum(z * (dcs - t * qss[j])))
                jac[row + 1, m + j] += dx * float(np.sum(z * (dc - t * qs[j])))
            row += 2 if fit_scalings else 1
        if odd:
            # second derivative of the reference kink in its argument
            s = math.sqrt(ck / 2.0) * (x + ck * t + shifts[-1])
            kpp = -2.0 * math.sqrt(ck) * (ck / 2.0) / np.cosh(s) ** 2 * np.tanh(s)
            for col in range(n_params):
                jac[row, col] = dx * float(np.sum(dz[col] * kp))
            jac[row, n_params - 1] += dx * float(np.sum(z * kpp))

        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise OutOfTubeError(f"singular modulation Jacobian: {exc}") from exc
        for j in range(m):
            shifts[j] += step[j]
        if fit_scalings:
            for j in range(m):
                scalings[j] += step[m + j]
        if odd:
            shifts[-1] += step[-1]
        if any(not 0 < cj < 2.0 / (9.0 * config.beta) for cj in scalings):
            raise OutOfTubeError("modulated scaling left the admissible range")

    raise OutOfTubeError(
        f"no convergence in {max_iter} Newton iterations "
        f"(last orthogonality residual {np.max(np.abs(last_res)):.3g})")


# --- interaction residuals -------------------------------------------------


def interaction_residual(scalings, beta: float, positions, *,
                         n: int = 4096, length: float | None = None) -> dict:
    """Defects of the decoupled-soliton identities at finite separation.

    R = sqrt(beta) sum Q_{c_j}(x - p_j) should satisfy
    R_xx - 2cR + 3 sqrt(c) R^2 - R^3 = -sqrt(beta) sum (2c - c_j) Q_j up to
    exponentially small cross terms, and its quartic energy combination
    should equal (2/3) sum c_j^{3/2}.  Returns both defects.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = 1.0 / (9.0 * beta)
    scalings = list(scalings)
    positions = list(positions)
    if length is None:
        span = (max(positions) - min(positions)) if len(positions) > 1 else 0.0
        length = span + 120.0 / math.sqrt(min(scalings))
    grid = Grid(n, length, x0=(min(positions) + max(positions)) / 2.0 - length / 2.0)
    x = grid.x
    fam = GardnerFamily(beta)
    sb = math.sqrt(beta)
    qs = [fam.value(cj, x - pj) for cj, pj in zip(scalings, positions)]
    r = sb * np.sum(qs, axis=0)
    r_xx = sb * np.sum([fam.dss(cj, x - pj)
                        for cj, pj in zip(scalings, positions)], axis=0)
    lhs = r_xx - 2.0 * c * r + 3.0 * math.sqrt(c) * r**2 - r**3
    rhs = -sb * np.sum([(2.0 * c - cj) * qj
                        for cj, qj in zip(scalings, qs)], axis=0)
    diff = lhs - rhs
    diff_x = spectral_derivative(diff, grid, 1)
    h1_defect = float(np.sqrt(grid.integrate(diff**2 + diff_x**2)))

    r_x = sb * np.sum([fam.ds(cj, x - pj)
                       for cj, pj in zip(scalings, positions)], axis=0)
    quartic = (0.5 * grid.integrate(r_x**2) + c * grid.integrate(r**2)
               - math.sqrt(c) * grid.integrate(r**3)
               + 0.25 * grid.integrate(r**4))
    target = 2.0 / 3.0 * sum(cj**1.5 for cj in scalings)
    return {
        "pointwise_h1": h1_defect,
        "energy_value": quartic,
        "energy_target": target,
        "energy_defect": abs(quartic - target),
        "separation": (min(b - a for a, b in zip(positions, positions[1:]))
                       if len(positions) > 1 else float("inf")),
    }


# --- energy expansion ------------------------------------------------------


def _fitted_r(config: MultiKinkConfig, state: ModulationState, t, x):
    sb = math.sqrt(config.beta)
    m = len(state.scalings)
    fam = GardnerFamily(config.beta)
    args = _soliton_args(config, state.shifts[:m], state.scalings, t, x)
    return sb * np.sum([fam.value(cj, a)
                        for cj, a in zip(state.scalings, args)], axis=0)


def quadratic_form_value(config: MultiKinkConfig, state: ModulationState) -> float:
    """F(t): the second-order energy functional at the fitted decomposition."""
    z = state.residual.values
    grid = state.residual.grid
    t = state.residual.t
    c = config.kink_scaling
    phi = eval_kink(c, state.shifts[-1] + c * t, grid.x)
    r = _fitted_r(config, state, t, grid.x)
    zx = spectral_derivative(z, grid, 1)
    integrand = (zx**2 + 2.0 * c * z**2 - 3.0 * (c - phi**2) * z**2
                 - 6.0 * math.sqrt(c) * r * z**2 + 3.0 * r**2 * z**2)
    return 0.5 * grid.integrate(integrand)


def energy_expansion_check(u: Field, state: ModulationState,
                           config: MultiKinkConfig) -> dict:
    """Defect of E[u] = E[phi_c] + (2/3) sum c_j^{3/2} + F(t) + cubic/tail terms."""
    from .diagnostics import energy_mass
    from .profiles import kink_energy

    c = config.kink_scaling
    energy, _ = energy_mass(u, c)
    kink_term = kink_energy(c)
    soliton_term = 2.0 / 3.0 * sum(cj**1.5 for cj in state.scalings)
    form = quadratic_form_value(config, state)
    defect = abs(energy - kink_term - soliton_term - form)
    return {
        "energy": energy,
        "kink_energy": kink_term,
        "soliton_energy": soliton_term,
        "quadratic_form": form,
        "defect": defect,
        "residual_h1": state.residual_h1,
    }


# --- quadratic forms and coercivity ---------------------------------------


def _smooth_ramp(tau):
    """Quintic smoothstep: 0 -> 1 on [0,1] with two flat derivatives at ends."""
    tau = np.clip(tau, 0.0, 1.0)
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)


def localization_weight(s, B: float):
    """Even C^2 bump Phi(s/B): 1 on [0,B], exp(-|s|/B) beyond 2B.

    Built as exp(-g) with g(s) = s * smoothstep(s-1) in the scaled variable;
    the transition stays within a constant multiple of e^{-s}.
    """
    a = np.abs(np.asarray(s, dtype=float)) / B
    g = a * _smooth_ramp(a - 1.0)
    return np.exp(-g)


@dataclass(frozen=True)
class QuadraticFormSpec:
    """Which second-order functional to discretize, and with what data.

    kinds: 'kink' (kink potential, weight 1), 'gardner_localized'
    (single Gardner soliton with the Phi_B weight), 'multikink' (the full
    multi-kink form with the slowly varying speed coefficient c(t,x)).
    """

    kind: str
    grid: Grid
    c: float
    beta: float | None = None
    B: float | None = None
    center: float = 0.0
    config: MultiKinkConfig | None = None
    state: ModulationState | None = None
    weights: WeightFamily | None = None
    t: float = 0.0

    def __post_init__(self):
        if self.kind not in ("kink", "gardner_localized", "multikink"):
            raise ValueError(f"unknown quadratic form kind {self.kind!r}")
        if self.kind == "gardner_localized" and (self.beta is None or self.B is None):
            raise ValueError("gardner_localized needs beta and B")
        if self.kind == "multikink" and (self.config is None or self.weights is None):
            raise ValueError("multikink needs a configuration and a weight family")

    def weight_and_potential(self):
        x = self.grid.x
        if self.kind == "kink":
            phi = eval_kink(self.c, -self.center, x)
            return np.ones_like(x), 2.0 * self.c - 3.0 * (self.c - phi**2)
        if self.kind == "gardner_localized":
            from .profiles import eval_gardner_soliton
            q = eval_gardner_soliton(self.c, self.beta, -self.center, x)
            w = localization_weight(x - self.center, self.B)
            return w, self.c - 2.0 * q + 3.0 * self.beta * q**2
        # multikink
        cfg = self.config
        c = cfg.kink_scaling
        t = self.t
        if self.state is not None:
            shifts, scalings = self.state.shifts, self.state.scalings
        else:
            shifts, scalings = cfg.shifts, cfg.scalings
        phi = eval_kink(c, shifts[-1] + c * t, x)
        fam = GardnerFamily(cfg.beta)
        args = _soliton_args(cfg, shifts, scalings, t, x)
        qs = [fam.value(cj, a) for cj, a in zip(scalings, args)]
        r = math.sqrt(cfg.beta) * np.sum(qs, axis=0)
        # slowly varying speed coefficient: 2c at the far left stepping down
        # through the scaling gaps at the weight midpoints (frame y = x + 3ct)
        y = x + 3.0 * c * t
        m = len(scalings)
        ctx = np.full_like(x, 2.0 * c)
        for j in range(1, m):
            ctx -= (scalings[j] - scalings[j - 1]) * self.weights.psi_j(j, t, y)
        ctx -= (2.0 * c - scalings[-1]) * self.weights.psi_j(m, t, y)
        pot = (ctx - 3.0 * (c - phi**2)
               - 6.0 * math.sqrt(c) * r + 3.0 * r**2)
        return np.ones_like(x), pot

    def constraint_vectors(self) -> list[np.ndarray]:
        x = self.grid.x
        if self.kind == "kink":
            return [eval_kink_deriv(self.c, -self.center, x)]
        if self.kind == "gardner_localized":
            fam = GardnerFamily(self.beta)
            return [fam.value(self.c, x - self.center),
                    fam.ds(self.c, x - self.center)]
        cfg = self.config
        if self.state is not None:
            shifts, scalings = self.state.shifts, self.state.scalings
        else:
            shifts, scalings = cfg.shifts, cfg.scalings
        c = cfg.kink_scaling
        out = [eval_kink_deriv(c, shifts[-1] + c * self.t, x)]
        fam = GardnerFamily(cfg.beta)
        args = _soliton_args(cfg, shifts, scalings, self.t, x)
        for cj, a in zip(scalings, args):
            out.append(fam.value(cj, a))
            out.append(fam.ds(cj, a))
        return out


def _derivative_matrix(grid: Grid) -> np.ndarray:
    k = grid.k.copy()
    if grid.n % 2 == 0:
        k[grid.n // 2] = 0.0
    eye = np.eye(grid.n)
    # force a contiguous real array so the later matmuls stay on the BLAS path
    return np.ascontiguousarray(
        np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(eye, axis=0), axis=0)))


def assemble_form(spec: QuadraticFormSpec):
    """Dense symmetric matrices (A, Gram) of the form and its H1 comparison.

    z^T A z = (1/2) int w (z_x^2 + V z^2) dx and z^T Gram z =
    int w (z_x^2 + z^2) dx, both with spectral differentiation.
    """
    grid = spec.grid
    w, v = spec.weight_and_potential()
    d1 = _derivative_matrix(grid)
    dxw = grid.dx * w
    a = 0.5 * (d1.T @ (dxw[:, None] * d1) + np.diag(dxw * v))
    gram = d1.T @ (dxw[:, None] * d1) + np.diag(dxw)
    a = 0.5 * (a + a.T)
    gram = 0.5 * (gram + gram.T)
    return a, gram


def form_value(spec: QuadraticFormSpec, z: np.ndarray) -> float:
    """Evaluate the form on samples z through the integrand route."""
    w, v = spec.weight_and_potential()
    zx = spectral_derivative(z, spec.grid, 1)
    return 0.5 * spec.grid.integrate(w * (zx**2 + v * z**2))


def coercivity_estimate(spec: QuadraticFormSpec, *,
                        constrained: bool = True) -> dict:
    """Smallest H1-normalized eigenvalue on the constraint complement.

    Constraints are projected out with an orthonormal complement basis; the
    generalized eigenproblem A y = lambda Gram y is then solved densely.
    """
    a, gram = assemble_form(spec)
    n = spec.grid.n
    if constrained:
        cons = np.array(spec.constraint_vectors())
        qmat, _ = scipy.linalg.qr(cons.T, mode="full")
        basis = qmat[:, cons.shape[0]:]
    else:
        basis = np.eye(n)
    a_r = basis.T @ a @ basis
    g_r = basis.T @ gram @ basis
    vals = scipy.linalg.eigh(a_r, g_r, eigvals_only=True, driver="gvd")
    return {
        "kind": spec.kind,
        "constrained": constrained,
        "n_constraints": 0 if not constrained else len(spec.constraint_vectors()),
        "lambda0": float(vals[0]),
    }


def quadratic_control_constant(cj_series, z_norms, sigma0: float,
                               separation: float) -> float:
    """Fitted K in sum_j |c_j(t)-c_j(0)| <= K (||z(t)||^2 + ||z(0)||^2 + e^{-sigma0 L}).

    cj_series: array (n_times, n_solitons); z_norms: H1 norms per time.
    """
    cj = np.asarray(cj_series, dtype=float)
    zn = np.asarray(z_norms, dtype=float)
    drift = np.sum(np.abs(cj - cj[0]), axis=1)
    denom = zn**2 + zn[0] ** 2 + math.exp(-sigma0 * separation)
    return float(np.max(drift / denom))
